"""Compactly supported functions sampled on uniform grids.

A :class:`SampledFunction` stores one value per grid cell. Cell ``k`` along an
axis covers ``[origin + k h, origin + (k+1) h)`` and its sample sits at the
cell center. ``nearest`` interpolation is piecewise constant on cells;
``multilinear`` interpolates between cell centers and is held constant on the
half cell next to the box boundary. Outside the box the function is zero.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SampledFunction",
    "from_callable",
    "indicator",
    "tent",
    "truncated_power",
    "random_piecewise",
    "parse_generator",
    "read_sfn",
    "write_sfn",
    "loads_sfn",
    "dumps_sfn",
]

INTERPS = ("nearest", "multilinear")


@dataclass(frozen=True, eq=False)
class SampledFunction:
    dim: int
    origin: tuple
    spacing: float
    shape: tuple
    values: np.ndarray
    interp: str = "nearest"

    def __post_init__(self):
        dim = int(self.dim)
        origin = tuple(float(a) for a in np.ravel(self.origin))
        shape = tuple(int(k) for k in np.ravel(self.shape))
        if dim < 1 or len(origin) != dim or len(shape) != dim:
            raise ValueError("origin and shape must both have length dim")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"spacing must be a positive real, got {self.spacing}")
        if any(k < 1 for k in shape):
            raise ValueError(f"shape entries must be positive, got {shape}")
        if self.interp not in INTERPS:
            raise ValueError(f"interp must be one of {INTERPS}, got {self.interp!r}")
        vals = np.array(self.values, dtype=float).reshape(shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "values", vals)

    # geometry -------------------------------------------------------------
    @property
    def lower(self):
        return np.asarray(self.origin)

    @property
    def upper(self):
        return np.asarray(self.origin) + np.asarray(self.shape) * self.spacing

    @property
    def cell_volume(self):
        return self.spacing**self.dim

    def cell_centers(self):
        """Array of shape ``shape + (dim,)`` with the cell-center coordinates."""
        axes = [
            self.origin[d] + (np.arange(self.shape[d]) + 0.5) * self.spacing
            for d in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def max_distance(self, x):
        """Largest Euclidean distance from ``x`` to a point of the support box."""
        x = np.asarray(x, dtype=float)
        far = np.maximum(np.abs(x - self.lower), np.abs(x - self.upper))
        return float(np.sqrt(np.sum(far**2)))

    # evaluation -----------------------------------------------------------
    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if self.dim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points must have trailing dimension {self.dim}")
        u = (pts - self.lower) / self.spacing
        shape = np.asarray(self.shape)
        inside = np.all((u >= 0.0) & (u < shape), axis=-1)
        if self.interp == "nearest":
            idx = np.floor(u).astype(np.int64)
            idx = np.clip(idx, 0, shape - 1)
            out = self.values[tuple(idx[..., d] for d in range(self.dim))]
        else:
            out = self._multilinear(u)
        return np.where(inside, out, 0.0)

    def _multilinear(self, u):
        shape = np.asarray(self.shape)
        c = np.clip(u - 0.5, 0.0, np.maximum(shape - 1, 0).astype(float))
        i0 = np.minimum(np.floor(c).astype(np.int64), np.maximum(shape - 2, 0))
        frac = c - i0
        frac = np.where(shape > 1, frac, 0.0)
        i1 = np.minimum(i0 + 1, shape - 1)
        out = np.zeros(u.shape[:-1])
        for corner in range(2**self.dim):
            wgt = np.ones(u.shape[:-1])
            idx = []
            for d in range(self.dim):
                hi = (corner >> d) & 1
                wgt = wgt * (frac[..., d] if hi else 1.0 - frac[..., d])
                idx.append(i1[..., d] if hi else i0[..., d])
            out = out + wgt * self.values[tuple(idx)]
        return out

    # derived functions ----------------------------------------------------
    def with_values(self, values):
        return SampledFunction(self.dim, self.origin, self.spacing, self.shape, values, self.interp)

    def abs_power(self, power):
        """Cellwise ``|f|**power`` (exact composition for nearest interpolation)."""
        return self.with_values(np.abs(self.values) ** power)

    def scaled(self, c):
        return self.with_values(c * self.values)

    def dilate(self, lam):
        """Return ``x -> f(lam x)``; exact in floating point for powers of two."""
        lam = float(lam)
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        return SampledFunction(
            self.dim,
            tuple(a / lam for a in self.origin),
            self.spacing / lam,
            self.shape,
            self.values,
            self.interp,
        )

    def breakpoint_planes(self, axis):
        """Coordinates along ``axis`` where the interpolant changes formula."""
        o, h, k = self.origin[axis], self.spacing, self.shape[axis]
        if self.interp == "nearest":
            return o + np.arange(k + 1) * h
        centers = o + (np.arange(k) + 0.5) * h
        return np.concatenate(([o], centers, [o + k * h]))

    def __repr__(self):
        return (
            f"SampledFunction(dim={self.dim}, origin={self.origin}, spacing={self.spacing:g}, "
            f"shape={self.shape}, interp={self.interp!r})"
        )


# generators ---------------------------------------------------------------

def from_callable(fn, lower, upper, cells, interp="nearest"):
    """Sample ``fn`` at cell centers of a cube ``[lower, upper]^dim``.

    ``lower``/``upper`` are scalars (cube) or length-``dim`` sequences with a
    common side length; ``cells`` is the cell count along each axis.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    sides = upper - lower
    if np.any(sides <= 0):
        raise ValueError("upper must exceed lower on every axis")
    h = float(sides[0]) / cells
    shape = tuple(int(round(s / h)) for s in sides)
    proto = SampledFunction(len(lower), tuple(lower), h, shape, np.zeros(shape), interp)
    vals = np.asarray(fn(proto.cell_centers()), dtype=float).reshape(shape)
    return proto.with_values(vals)


def indicator(a, b, dim=1, cells=32, interp="nearest"):
    return from_callable(lambda x: np.ones(x.shape[:-1]), [a] * dim, [b] * dim, cells, interp)


def tent(a, b, dim=1, cells=32, interp="nearest"):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def fn(x):
        return np.prod(np.clip(1.0 - np.abs(x - mid) / half, 0.0, None), axis=-1)

    return from_callable(fn, [a] * dim, [b] * dim, cells, interp)


def truncated_power(beta, a, b, dim=1, cells=32, interp="nearest"):
    def fn(x):
        r = np.sqrt(np.sum(x**2, axis=-1))
        return r**beta

    return from_callable(fn, [a] * dim, [b] * dim, cells, interp)


def random_piecewise(k, seed, dim=1, a=-1.0, b=1.0, interp="nearest"):
    """``k`` cells per axis on ``[a, b]^dim`` with random signs and magnitudes in [0.5, 1.5)."""
    rng = np.random.default_rng(seed)
    shape = (k,) * dim
    signs = rng.choice([-1.0, 1.0], size=shape)
    mags = rng.uniform(0.5, 1.5, size=shape)
    h = (b - a) / k
    return SampledFunction(dim, (a,) * dim, h, shape, signs * mags, interp)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_generator(spec, dim=1, cells=32, interp="nearest"):
    """Build a function from ``chi:a:b``, ``tent:a:b``, ``pow:beta:a:b`` or ``randpc:k:seed``."""
    parts = spec.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "chi" and len(args) == 2:
            return indicator(float(args[0]), float(args[1]), dim, cells, interp)
        if kind == "tent" and len(args) == 2:
            return tent(float(args[0]), float(args[1]), dim, cells, interp)
        if kind == "pow" and len(args) == 3:
            return truncated_power(float(args[0]), float(args[1]), float(args[2]), dim, cells, interp)
        if kind == "randpc" and len(args) == 2:
            return random_piecewise(int(args[0]), int(args[1]), dim, interp=interp)
    except ValueError as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from None
    raise ValueError(
        f"unknown generator spec {spec!r}; expected chi:a:b, tent:a:b, pow:beta:a:b or randpc:k:seed"
    )


# SFN v1 text format ---------------------------------------------------------

_HEADER = re.compile(
    r"^SFN v1 dim=(\d+) shape=([\d,]+) origin=([^ ]+) spacing=([^ ]+) interp=(nearest|multilinear)$"
)


def dumps_sfn(f):
    header = "SFN v1 dim={} shape={} origin={} spacing={} interp={}".format(
        f.dim,
        ",".join(str(k) for k in f.shape),
        ",".join(repr(a) for a in f.origin),
        repr(f.spacing),
        f.interp,
    )
    body = " ".join(repr(float(v)) for v in f.values.ravel())
    return header + "\n" + body + "\n"


def loads_sfn(text):
    lines = text.strip().splitlines()
    if not lines:
        raise ValueError("empty SFN document")
    m = _HEADER.match(lines[0].strip())
    if m is None:
        raise ValueError(f"malformed SFN header: {lines[0]!r}")
    dim = int(m.group(1))
    shape = tuple(int(k) for k in m.group(2).split(","))
    origin = tuple(float(a) for a in m.group(3).split(","))
    spacing = float(m.group(4))
    values = np.array(" ".join(lines[1:]).split(), dtype=float)
    if values.size != math.prod(shape):
        raise ValueError(f"SFN body has {values.size} values, header shape needs {math.prod(shape)}")
    return SampledFunction(dim, origin, spacing, shape, values, m.group(5))


def write_sfn(f, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_sfn(f))


def read_sfn(path):
    with open(path, encoding="ascii") as fh:
        return loads_sfn(fh.read())
