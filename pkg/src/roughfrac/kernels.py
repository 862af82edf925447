"""Homogeneous degree-zero kernels on (R^n)^m and the block norm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .exceptions import DomainError, NonIntegrable

__all__ = [
    "KernelSpec",
    "block_norm",
    "kernel_eval",
    "kernel_sphere_integral",
    "kernel_sphere_norm",
    "parse_kernel",
    "sphere_area",
    "uniform_sphere",
]

BUILTINS = ("first-coordinate-power", "sign", "constant")


def block_norm(ybar, n=None):
    """Sum of the Euclidean norms of the ``m`` blocks of ``ybar``.

    ``ybar`` is either a sequence of ``m`` vectors in R^n, or a flat array of
    length ``m n`` together with ``n``.
    """
    arr = np.asarray(ybar, dtype=float)
    if n is not None:
        arr = arr.reshape(arr.shape[:-1] + (-1, n))
    elif arr.ndim == 1:
        arr = arr[:, None]
    return np.sum(np.sqrt(np.sum(arr**2, axis=-1)), axis=-1)


def sphere_area(d):
    """Surface measure of the unit sphere ``S^{d-1}`` in R^d (``d >= 1``)."""
    return float(2.0 * math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d)))


def uniform_sphere(rng, size, d):
    g = rng.standard_normal((size, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``Omega`` given by its restriction to the Euclidean unit sphere of R^{mn}.

    ``variant`` is ``"constant"``, ``"builtin"`` or ``"tabulated"``. Builtins:

    ``first-coordinate-power`` (``gamma``)
        ``|theta_1|^(-gamma)``; lies in ``L^s`` of the sphere iff ``s gamma < 1``.
    ``sign`` (``axis``)
        ``sign(theta_axis)``, an odd bounded kernel.
    """

    variant: str
    m: int
    n: int
    params: dict = field(default_factory=dict)
    s: float = math.inf
    ls_norm_estimate: float | None = None

    def __post_init__(self):
        if self.variant not in ("constant", "builtin", "tabulated"):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "builtin" and self.params.get("id") not in BUILTINS:
            raise ValueError(f"unknown builtin kernel {self.params.get('id')!r}")
        if self.variant == "tabulated":
            dirs = np.asarray(self.params["directions"], dtype=float)
            if dirs.ndim != 2 or dirs.shape[1] != self.mn:
                raise ValueError("tabulated directions must have shape (K, mn)")
            dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
            vals = np.asarray(self.params["values"], dtype=float)
            object.__setattr__(self, "_tree", cKDTree(dirs))
            object.__setattr__(self, "_table", vals)

    @classmethod
    def constant(cls, c, m, n, s=math.inf):
        return cls("constant", m, n, {"c": float(c)}, s)

    @classmethod
    def first_coordinate_power(cls, gamma, m, n, s=2.0):
        return cls("builtin", m, n, {"id": "first-coordinate-power", "gamma": float(gamma)}, s)

    @classmethod
    def sign(cls, m, n, axis=0, s=math.inf):
        return cls("builtin", m, n, {"id": "sign", "axis": int(axis)}, s)

    @classmethod
    def tabulated(cls, directions, values, m, n, s=2.0):
        return cls("tabulated", m, n, {"directions": directions, "values": values}, s)

    @property
    def mn(self):
        return self.m * self.n

    @property
    def is_constant(self):
        return self.variant == "constant"

    def with_s(self, s):
        return KernelSpec(self.variant, self.m, self.n, dict(self.params), s, self.ls_norm_estimate)

    def evaluate(self, ybar):
        """Vectorized evaluation on an array with trailing dimension ``mn``."""
        y = np.asarray(ybar, dtype=float)
        if y.shape[-1] != self.mn:
            raise ValueError(f"expected trailing dimension {self.mn}, got {y.shape[-1]}")
        r = np.sqrt(np.sum(y**2, axis=-1, keepdims=True))
        if np.any(r == 0.0):
            raise DomainError("kernel is undefined at ybar = 0")
        theta = y / r
        return self._on_sphere(theta)

    def _on_sphere(self, theta):
        if self.variant == "constant":
            return np.full(theta.shape[:-1], self.params["c"])
        if self.variant == "tabulated":
            _, idx = self._tree.query(theta.reshape(-1, self.mn))
            return self._table[idx].reshape(theta.shape[:-1])
        kid = self.params["id"]
        if kid == "first-coordinate-power":
            with np.errstate(divide="ignore"):
                return np.abs(theta[..., 0]) ** (-self.params["gamma"])
        if kid == "sign":
            return np.sign(theta[..., self.params.get("axis", 0)])
        return np.full(theta.shape[:-1], self.params.get("c", 1.0))

    def describe(self):
        if self.variant == "constant":
            return f"constant:{self.params['c']:g}"
        if self.variant == "tabulated":
            return f"tabulated[{len(self._table)}]"
        kid = self.params["id"]
        if kid == "first-coordinate-power":
            return f"power:{self.params['gamma']:g}"
        return f"sign:{self.params.get('axis', 0)}"


def parse_kernel(spec, m, n, s=None):
    """Parse ``constant:c``, ``power:gamma`` or ``sign[:axis]``."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "constant":
            c = float(parts[1]) if len(parts) > 1 else 1.0
            return KernelSpec.constant(c, m, n, math.inf if s is None else s)
        if kind in ("power", "first-coordinate-power"):
            gamma = float(parts[1]) if len(parts) > 1 else 0.25
            return KernelSpec.first_coordinate_power(gamma, m, n, 2.0 if s is None else s)
        if kind == "sign":
            axis = int(parts[1]) if len(parts) > 1 else 0
            return KernelSpec.sign(m, n, axis, math.inf if s is None else s)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad kernel spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown kernel spec {spec!r}; expected constant:c, power:gamma or sign[:axis]")


def kernel_eval(k, ybar):
    """``Omega(ybar / |ybar|_2)`` at a single point.

    ``ybar`` is a flat vector of length ``mn`` or a sequence of ``m`` blocks.
    """
    y = np.asarray(ybar, dtype=float).reshape(-1)
    return float(k.evaluate(y))


def kernel_sphere_integral(k, s, samples=100_000, seed=0):
    """Monte Carlo estimates of ``int_{S^{mn-1}} |Omega|^s`` at doubling sample sizes.

    Returns the list of ``(N, estimate)`` pairs for ``N = samples/8, ..., samples``
    taken from one seeded stream. For ``s = inf`` the estimates are sample maxima.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not s > 1:
        raise ValueError("s must exceed 1")
    rng = np.random.default_rng(seed)
    theta = uniform_sphere(rng, samples, k.mn)
    vals = np.abs(k._on_sphere(theta))
    area = sphere_area(k.mn)
    sizes = sorted({max(1, samples >> j) for j in range(4)})
    out = []
    if math.isinf(s):
        for size in sizes:
            out.append((size, float(np.max(vals[:size]))))
    else:
        powered = vals**s
        csum = np.cumsum(powered)
        for size in sizes:
            out.append((size, float(area * csum[size - 1] / size)))
    return out


def kernel_sphere_norm(k, s, samples=100_000, seed=0, rel_change=0.1):
    """Monte Carlo estimate of ``||Omega||_{L^s(S^{mn-1})}``.

    Deterministic given ``seed``. The stability test compares the running
    estimate of the integral of ``|Omega|^s`` across the final doubling of the
    sample size; a relative change above ``rel_change`` raises
    :class:`NonIntegrable` carrying the last estimate.
    """
    hist = kernel_sphere_integral(k, s, samples, seed)
    last = hist[-1][1]
    if len(hist) > 1:
        prev = hist[-2][1]
        change = abs(last - prev) / max(abs(prev), np.finfo(float).tiny)
        if not np.isfinite(last) or change > rel_change:
            est = last if math.isinf(s) else last ** (1.0 / s)
            raise NonIntegrable(
                f"L^{s:g} sphere norm estimate not stable (relative change {change:.3g} "
                f"across final doubling)",
                estimate=est,
                history=hist,
            )
    return last if math.isinf(s) else last ** (1.0 / s)
