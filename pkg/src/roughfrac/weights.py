"""Weights, cube families and Muckenhoupt-type class constants.

A class constant is a supremum over all axis-parallel cubes; here it is
estimated on a finite :class:`CubeFamily` made of a dyadic pyramid over a
root cube plus seeded random cubes. Cube averages use a tensor
Gauss-Legendre rule on a uniform subdivision. On cubes containing the origin,
weight powers with a power singularity there are integrated over dyadic shells
toward 0 with a geometric tail, and powers that are not integrable near 0 are
counted explicitly. Per-cube values depend only on the cube, hence enlarging
the family never lowers the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    HypothesisViolation,
    NoFeasibleEpsilon,
    NonFiniteWeight,
    NonIntegrableOnCube,
)
from .exponents import conjugate

__all__ = [
    "ClassReport",
    "Cube",
    "CubeFamily",
    "RemarkCheck",
    "WeightSpec",
    "ap_constant",
    "apq_constant",
    "cond7_constant",
    "divergence_trend",
    "pair_alpha_constant",
    "perturb_epsilon_search",
    "remark2_implication_check",
    "thm6_condition_constant",
]

VARIANTS = ("constant", "power", "piecewise", "product")


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A positive weight on R^n.

    ``constant``: ``c``. ``power``: ``|x|^beta`` (Euclidean norm).
    ``piecewise``: a :class:`SampledFunction` with positive values inside its
    box and ``exterior`` outside. ``product``: ``prod_j w_j^(a_j)`` over
    ``factors = ((w_1, a_1), ...)``.
    """

    variant: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        p = self.params
        if self.variant == "constant" and not p.get("c", 0) > 0:
            raise HypothesisViolation("w > 0 a.e.", f"constant c={p.get('c')}")
        if self.variant == "piecewise":
            f = p["function"]
            if f.dim != self.dim:
                raise ValueError("piecewise weight dimension mismatch")
            if not (np.all(f.values > 0) and np.all(np.isfinite(f.values))):
                raise HypothesisViolation("w > 0 a.e.", "piecewise values must be positive and finite")
            if not p.get("exterior", 0) > 0:
                raise HypothesisViolation("w > 0 a.e.", f"exterior={p.get('exterior')}")

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c, dim=1):
        return cls("constant", dim, {"c": float(c)})

    @classmethod
    def power(cls, beta, dim=1):
        return cls("power", dim, {"beta": float(beta)})

    @classmethod
    def piecewise(cls, function, exterior=1.0):
        return cls("piecewise", function.dim, {"function": function, "exterior": float(exterior)})

    @classmethod
    def product(cls, factors):
        fs = tuple((w, 1.0) if isinstance(w, WeightSpec) else (w[0], float(w[1])) for w in factors)
        if not fs:
            raise ValueError("product needs at least one factor")
        dims = {w.dim for w, _ in fs}
        if len(dims) != 1:
            raise ValueError("product factors must share a dimension")
        return cls("product", dims.pop(), {"factors": fs})

    @classmethod
    def parse(cls, spec, dim=1):
        """Build from ``"constant:c"``, ``"power:beta"`` or a dict with ``kind``."""
        if isinstance(spec, WeightSpec):
            return spec
        if isinstance(spec, str):
            kind, _, rest = spec.partition(":")
            if kind == "constant":
                return cls.constant(float(rest), dim)
            if kind == "power":
                return cls.power(float(rest), dim)
            raise ValueError(f"unknown weight spec {spec!r}")
        if isinstance(spec, dict):
            kind = spec.get("kind")
            if kind == "constant":
                return cls.constant(spec["c"], dim)
            if kind == "power":
                return cls.power(spec["beta"], dim)
            if kind == "product":
                return cls.product(
                    [(cls.parse(f, dim), f.get("exponent", 1.0) if isinstance(f, dict) else 1.0)
                     for f in spec["factors"]]
                )
            if kind == "piecewise":
                from .functions import read_sfn

                return cls.piecewise(read_sfn(spec["path"]), spec.get("exterior", 1.0))
            raise ValueError(f"unknown weight kind {kind!r}")
        raise TypeError("weight spec must be a string, dict or WeightSpec")

    # evaluation ----------------------------------------------------------

    def evaluate(self, points):
        x = np.asarray(points, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        p = self.params
        if self.variant == "constant":
            return np.full(x.shape[:-1], p["c"])
        if self.variant == "power":
            r = np.sqrt(np.sum(x**2, axis=-1))
            with np.errstate(divide="ignore"):
                return r ** p["beta"]
        if self.variant == "piecewise":
            f = p["function"]
            u = (x - f.lower) / f.spacing
            inside = np.all((u >= 0) & (u < np.asarray(f.shape)), axis=-1)
            return np.where(inside, f(x), p["exterior"])
        out = np.ones(x.shape[:-1])
        for w, a in p["factors"]:
            out = out * w.evaluate(x) ** a
        return out

    __call__ = evaluate

    def origin_exponent(self):
        """``g`` with ``w(x) ~ |x|^g`` as ``x -> 0``; every variant is bounded elsewhere."""
        if self.variant == "power":
            return self.params["beta"]
        if self.variant == "product":
            return sum(a * w.origin_exponent() for w, a in self.params["factors"])
        return 0.0

    def pow(self, a):
        return WeightSpec.product([(self, a)])

    def scaled(self, c):
        return WeightSpec.product([(WeightSpec.constant(c, self.dim), 1.0), (self, 1.0)])

    def describe(self):
        p = self.params
        if self.variant in ("constant", "power"):
            return {"kind": self.variant, **p}
        if self.variant == "piecewise":
            return {"kind": "piecewise", "exterior": p["exterior"], "function": repr(p["function"])}
        return {"kind": "product",
                "factors": [dict(w.describe(), exponent=a) for w, a in p["factors"]]}

    def __repr__(self):
        return f"WeightSpec({self.describe()})"


# cube families ------------------------------------------------------------

@dataclass(frozen=True)
class Cube:
    lower: tuple
    side: float
    level: int | None = None

    @property
    def volume(self):
        return self.side ** len(self.lower)

    def to_dict(self):
        return {"lower": list(self.lower), "side": self.side, "level": self.level}


@dataclass(frozen=True)
class CubeFamily:
    """Dyadic pyramid over ``[lower, lower + side]^dim`` plus random cubes.

    ``refine`` sets the quadrature: a cube ``L`` dyadic levels below the root
    is split into ``2^(L + refine)`` subcells per axis (capped so that at
    most ``max_points`` nodes are used per cube).
    """

    lower: tuple = (-1.0,)
    side: float = 2.0
    level_min: int = 0
    level_max: int = 8
    random_count: int = 0
    seed: int = 0
    refine: int = 2
    max_points: int = 2**16

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("root side must be positive")
        if not 0 <= self.level_min <= self.level_max:
            raise ValueError("need 0 <= level_min <= level_max")
        if self.random_count < 0:
            raise ValueError("random_count must be >= 0")

    @classmethod
    def interval(cls, a, b, **kw):
        return cls(lower=(float(a),), side=float(b - a), **kw)

    @property
    def dim(self):
        return len(self.lower)

    def level_cubes(self, level):
        n = self.dim
        k = 2**level
        h = self.side / k
        idx = np.stack(np.meshgrid(*([np.arange(k)] * n), indexing="ij"), axis=-1).reshape(-1, n)
        lo = np.asarray(self.lower) + idx * h
        return [Cube(tuple(float(v) for v in row), h, level) for row in lo]

    def random_cubes(self):
        rng = np.random.default_rng(self.seed)
        out = []
        smallest = self.side * 2.0 ** (-self.level_max)
        for _ in range(self.random_count):
            side = float(rng.uniform(smallest, self.side))
            lo = np.asarray(self.lower) + rng.random(self.dim) * (self.side - side)
            out.append(Cube(tuple(float(v) for v in lo), side, None))
        return out

    def resolution(self, cube):
        """Subcells per axis used for ``cube``."""
        rel = max(0, int(round(math.log2(self.side / cube.side))))
        k = 2 ** (rel + self.refine)
        cap = int(2 ** math.floor(math.log2(self.max_points ** (1.0 / self.dim) / 2)))
        return max(1, min(k, cap))


def _nodes(kappa, dim):
    """Relative tensor Gauss-Legendre (2 points per subcell) nodes in [0,1]^dim."""
    xi = np.array([-1.0, 1.0]) / math.sqrt(3.0)
    u = ((np.arange(kappa)[:, None] + 0.5 * (xi + 1.0)[None, :]) / kappa).ravel()
    w1 = np.full(u.shape, 0.5 / kappa)
    grids = np.meshgrid(*([u] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w1] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, wts


def _box_difference(olo, ohi, ilo, ihi):
    """Boxes tiling ``[olo, ohi] minus [ilo, ihi]`` for nested boxes."""
    axes = [((olo[d], ilo[d]), (ilo[d], ihi[d]), (ihi[d], ohi[d])) for d in range(len(olo))]
    pieces = []
    for choice in np.ndindex(*([3] * len(olo))):
        if all(c == 1 for c in choice):
            continue
        seg = [axes[d][c] for d, c in enumerate(choice)]
        if all(b > a for a, b in seg):
            pieces.append(seg)
    return pieces


def _origin_graded(cube, w, a, c, kappa, depth=40):
    """``avg_Q w^a`` on a cube containing 0, graded in dyadic shells toward 0.

    ``c = a * w.origin_exponent()`` gives the shell ratio ``2^-(c+n)`` used
    to sum the remaining core as a geometric tail, exact when ``w`` is
    homogeneous at the origin.
    """
    n = len(cube.lower)
    lo = np.asarray(cube.lower, dtype=float)
    hi = lo + cube.side
    reach = float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))
    u, wt = _nodes(kappa, n)
    pts, wts, shell = [], [], []
    for k in range(depth):
        d0, d1 = reach * 2.0**-k, reach * 2.0 ** -(k + 1)
        olo, ohi = np.maximum(lo, -d0), np.minimum(hi, d0)
        ilo, ihi = np.maximum(lo, -d1), np.minimum(hi, d1)
        for seg in _box_difference(olo, ohi, ilo, ihi):
            plo = np.array([s[0] for s in seg])
            ext = np.array([s[1] - s[0] for s in seg])
            pts.append(plo + ext * u)
            wts.append(np.prod(ext) * wt)
            shell.append(np.full(len(wt), k))
    pts, wts, shell = np.concatenate(pts), np.concatenate(wts), np.concatenate(shell)
    vals = w.evaluate(pts)
    if np.any(~(vals > 0)):
        raise HypothesisViolation("w > 0 a.e.", "weight vanishes on a probe cube node")
    per_shell = np.bincount(shell, weights=vals**a * wts, minlength=depth)
    ratio = 2.0 ** -(c + n)
    return (per_shell.sum() + per_shell[-1] * ratio / (1.0 - ratio)) / cube.volume


def _cube_stats(cubes, fam, terms, want_min):
    """Per-cube averages ``avg_Q w^a`` for ``terms = [(w, a), ...]``.

    Returns ``(avgs, coarse_avgs, mins)`` of shapes ``(C, T)``, ``(C, T)``
    and ``(C, W)`` where ``W`` counts the distinct weights in ``want_min``.
    ``coarse_avgs`` use half the subcells and feed the stability check.
    """
    C, T = len(cubes), len(terms)
    avgs = np.empty((C, T))
    coarse = np.empty((C, T))
    mins = np.empty((C, len(want_min)))
    groups = {}
    for i, q in enumerate(cubes):
        groups.setdefault(fam.resolution(q), []).append(i)
    for kappa, idx in groups.items():
        lo = np.asarray([cubes[i].lower for i in idx])
        side = np.asarray([cubes[i].side for i in idx])
        for target, kap in ((avgs, kappa), (coarse, max(1, kappa // 2))):
            u, wt = _nodes(kap, fam.dim)
            pts = lo[:, None, :] + side[:, None, None] * u[None, :, :]
            cache = {}
            for t, (w, a) in enumerate(terms):
                if id(w) not in cache:
                    vals = w.evaluate(pts)
                    if np.any(~(vals > 0)):
                        raise HypothesisViolation("w > 0 a.e.", "weight vanishes on a probe cube node")
                    if np.any(~np.isfinite(vals)):
                        raise NonFiniteWeight("weight is infinite at a quadrature node")
                    cache[id(w)] = vals
                target[idx, t] = (cache[id(w)] ** a) @ wt
            if target is avgs:
                for j, w in enumerate(want_min):
                    vals = cache.get(id(w))
                    if vals is None:
                        vals = w.evaluate(pts)
                    mins[idx, j] = vals.min(axis=1)
    # a power singularity at 0 defeats the uniform rule; grade toward it
    n = fam.dim
    kappa = max(1, 4 >> (n - 1))
    for t, (w, a) in enumerate(terms):
        c = a * w.origin_exponent()
        if c == 0.0 or c <= -n:
            continue
        for i, q in enumerate(cubes):
            if all(lo <= 0.0 <= lo + q.side for lo in q.lower):
                avgs[i, t] = _origin_graded(q, w, a, c, kappa)
                coarse[i, t] = _origin_graded(q, w, a, c, max(1, kappa // 2))
    return avgs, coarse, mins


def divergence_trend(per_level, growth_factor=1.03, decay=0.5):
    """Whether per-level sups keep growing at either end of the level range.

    Looks at the three log-increments nearest the finest (or coarsest)
    level. Fires when all three are positive, their mean reaches
    ``log(growth_factor)`` and the outermost is at least ``decay`` times the
    mean, so a saturating sequence is not flagged. Returns ``(flag,
    direction)`` with direction ``"fine"``, ``"coarse"`` or ``None``.
    """
    v = np.asarray(per_level, dtype=float)
    if len(v) < 4:
        return False, None
    if np.any(~np.isfinite(v)):
        return True, "nonfinite"
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(v)
    if np.any(~np.isfinite(logs)):
        return False, None
    up = np.diff(logs)
    lg = math.log(growth_factor)
    # ordered from the interior toward the end of the level range
    for direction, inc in (("fine", up[-3:]), ("coarse", -up[:3][::-1])):
        mean = float(np.mean(inc))
        if np.all(inc > 0) and mean >= lg and inc[-1] >= decay * mean:
            return True, direction
    return False, None


@dataclass(frozen=True)
class ClassReport:
    """Family supremum of a class functional and its per-level profile."""

    name: str
    sup_estimate: float
    argmax_cube: Cube
    per_level_sup: list
    divergence_flag: bool
    cube_values: np.ndarray = field(repr=False)
    cubes: list = field(repr=False)
    unstable_cubes: int = 0
    max_refinement_change: float = 0.0
    direction: str | None = None
    params: dict = field(default_factory=dict)
    nonintegrable_cubes: int = 0

    @property
    def finite(self):
        return bool(math.isfinite(self.sup_estimate) and not self.divergence_flag
                    and self.nonintegrable_cubes == 0)

    def to_dict(self):
        return {
            "name": self.name,
            "sup_estimate": self.sup_estimate,
            "argmax_cube": self.argmax_cube.to_dict(),
            "per_level_sup": list(self.per_level_sup),
            "divergence_flag": self.divergence_flag,
            "direction": self.direction,
            "unstable_cubes": self.unstable_cubes,
            "max_refinement_change": self.max_refinement_change,
            "nonintegrable_cubes": self.nonintegrable_cubes,
            "params": self.params,
        }


def _family_cubes(fam):
    cubes = []
    for lev in range(fam.level_min, fam.level_max + 1):
        cubes.extend(fam.level_cubes(lev))
    return cubes + fam.random_cubes()


def _class_report(name, fam, terms, formula, quad_tol, want_min=(), strict=False,
                  growth_factor=1.03, params=None):
    cubes = _family_cubes(fam)
    avgs, coarse, mins = _cube_stats(cubes, fam, terms, list(want_min))
    vol = np.array([q.volume for q in cubes])
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        vals = formula(avgs, mins, vol)
        rel = np.max(np.abs(avgs - coarse) / np.abs(avgs), axis=1)
    unstable = rel > quad_tol
    # quadrature nodes avoid the origin, so a non-integrable power singularity
    # there would otherwise show up only as a finite, resolution-dependent value
    n = fam.dim
    at_origin = np.array([all(lo <= 0.0 <= lo + q.side for lo in q.lower) for q in cubes])
    singular = any(a * w.origin_exponent() <= -n for w, a in terms)
    nonint = at_origin if singular else np.zeros(len(cubes), dtype=bool)
    if strict and np.any(nonint):
        i = int(np.argmax(nonint))
        raise NonIntegrableOnCube(f"{name}: weight power is not integrable near 0", cube=cubes[i])
    if strict and np.any(unstable):
        i = int(np.argmax(rel))
        raise NonIntegrableOnCube(
            f"{name}: cube average changed by {rel[i]:.3g} under refinement", cube=cubes[i]
        )
    levels = np.array([-1 if q.level is None else q.level for q in cubes])
    per_level = [float(np.max(vals[levels == lev])) for lev in range(fam.level_min, fam.level_max + 1)]
    k = int(np.argmax(vals))
    flag, direction = divergence_trend(per_level, growth_factor)
    return ClassReport(
        name=name,
        sup_estimate=float(vals[k]),
        argmax_cube=cubes[k],
        per_level_sup=per_level,
        divergence_flag=bool(flag),
        cube_values=vals,
        cubes=cubes,
        unstable_cubes=int(np.sum(unstable)),
        max_refinement_change=float(np.max(rel)),
        direction=direction,
        params=params or {},
        nonintegrable_cubes=int(np.sum(nonint)),
    )


def _as_weight(w, fam):
    return WeightSpec.parse(w, fam.dim) if not isinstance(w, WeightSpec) else w


def ap_constant(w, p, fam, quad_tol=1e-3, strict=False, growth_factor=1.03):
    """``sup_Q (avg_Q w) (avg_Q w^(1-p'))^(p-1)`` on ``fam``."""
    p = float(p)
    if not 1.0 < p < math.inf:
        raise HypothesisViolation("1 < p < inf", f"p={p}")
    w = _as_weight(w, fam)
    pp = conjugate(p)
    terms = [(w, 1.0), (w, 1.0 - pp)]
    return _class_report(
        "A_p", fam, terms, lambda a, mn, v: a[:, 0] * a[:, 1] ** (p - 1.0),
        quad_tol, strict=strict, growth_factor=growth_factor, params={"p": p},
    )


def apq_constant(w, p, q, fam, quad_tol=1e-3, strict=False, growth_factor=1.03):
    """``sup_Q (avg_Q w^q)^(1/q) (avg_Q w^(-p'))^(1/p')``; ``p = 1`` uses ``1/min w``."""
    p, q = float(p), float(q)
    if not 1.0 <= p <= q < math.inf:
        raise HypothesisViolation("1 < p < q < inf", f"p={p}, q={q}")
    w = _as_weight(w, fam)
    if p == 1.0:
        return _class_report(
            "A_pq", fam, [(w, q)], lambda a, mn, v: a[:, 0] ** (1.0 / q) / mn[:, 0],
            quad_tol, want_min=(w,), strict=strict, growth_factor=growth_factor,
            params={"p": p, "q": q},
        )
    pp = conjugate(p)
    return _class_report(
        "A_pq", fam, [(w, q), (w, -pp)],
        lambda a, mn, v: a[:, 0] ** (1.0 / q) * a[:, 1] ** (1.0 / pp),
        quad_tol, strict=strict, growth_factor=growth_factor, params={"p": p, "q": q},
    )


def pair_alpha_constant(u, v, p, q, alpha, fam, quad_tol=1e-3, strict=False, growth_factor=1.03):
    """Two-weight fractional class functional.

    ``p > 1``: ``|Q|^(1/q + alpha/n - 1/p) (avg u)^(1/q) (avg v^(1-p'))^(1/p')``.
    ``p = 1``: ``|Q|^(1/q + alpha/n - 1) (avg u)^(1/q) / min_Q v`` with the
    minimum taken over the quadrature nodes.
    """
    p, q, alpha = float(p), float(q), float(alpha)
    n = fam.dim
    if not 1.0 <= p <= q < math.inf:
        raise HypothesisViolation("1 <= p <= q < inf", f"p={p}, q={q}")
    if not 0.0 <= alpha < n:
        raise HypothesisViolation("0 <= alpha < n", f"alpha={alpha}, n={n}")
    u, v = _as_weight(u, fam), _as_weight(v, fam)
    params = {"p": p, "q": q, "alpha": alpha}
    if p == 1.0:
        e = 1.0 / q + alpha / n - 1.0
        return _class_report(
            "A_pq^alpha", fam, [(u, 1.0)],
            lambda a, mn, vol: vol**e * a[:, 0] ** (1.0 / q) / mn[:, 0],
            quad_tol, want_min=(v,), strict=strict, growth_factor=growth_factor, params=params,
        )
    pp = conjugate(p)
    e = 1.0 / q + alpha / n - 1.0 / p
    return _class_report(
        "A_pq^alpha", fam, [(u, 1.0), (v, 1.0 - pp)],
        lambda a, mn, vol: vol**e * a[:, 0] ** (1.0 / q) * a[:, 1] ** (1.0 / pp),
        quad_tol, strict=strict, growth_factor=growth_factor, params=params,
    )


def cond7_constant(u, v, p_i, q_i, r_i, alpha, s_prime, m, fam, quad_tol=1e-3, strict=False,
                   growth_factor=1.03):
    """Bumped two-weight testing functional for one factor.

    ``|Q|^(s'/q_i + alpha s'/(mn) - s'/p_i) (avg u)^(s'/q_i)
    (avg v^(r(1-P')))^(1/(r P'))`` with ``P = p_i/s'``.
    """
    p_i, q_i, r_i, alpha, s_prime = map(float, (p_i, q_i, r_i, alpha, s_prime))
    n = fam.dim
    if not r_i > 1.0:
        raise HypothesisViolation("r_i > 1", f"r_i={r_i}")
    if not s_prime < p_i < q_i:
        raise HypothesisViolation("s' < p_i < q_i", f"s'={s_prime}, p_i={p_i}, q_i={q_i}")
    u, v = _as_weight(u, fam), _as_weight(v, fam)
    P = p_i / s_prime
    Pp = conjugate(P)
    e = s_prime / q_i + alpha * s_prime / (m * n) - s_prime / p_i
    return _class_report(
        "cond7", fam, [(u, 1.0), (v, r_i * (1.0 - Pp))],
        lambda a, mn, vol: vol**e * a[:, 0] ** (s_prime / q_i) * a[:, 1] ** (1.0 / (r_i * Pp)),
        quad_tol, strict=strict, growth_factor=growth_factor,
        params={"p_i": p_i, "q_i": q_i, "r_i": r_i, "alpha": alpha, "s_prime": s_prime, "m": m},
    )


def thm6_condition_constant(u, v, p_i, p, r_i, alpha, s_prime, m, fam, quad_tol=1e-3,
                            strict=False, growth_factor=1.03):
    """Two-weight functional with the bump on ``u``.

    ``|Q|^(s'/(mp) + alpha s'/(mn) - s'/p_i) (avg u^r)^(s'/(r m p))
    (avg v^(r(1-P')))^(1/(r P'))`` with ``P = p_i/s'``.
    """
    p_i, p, r_i, alpha, s_prime = map(float, (p_i, p, r_i, alpha, s_prime))
    n = fam.dim
    if not r_i > 1.0:
        raise HypothesisViolation("r_i > 1", f"r_i={r_i}")
    if not s_prime < p_i < m * p < math.inf:
        raise HypothesisViolation("s' < p_i < mp < inf", f"s'={s_prime}, p_i={p_i}, mp={m * p}")
    u, v = _as_weight(u, fam), _as_weight(v, fam)
    P = p_i / s_prime
    Pp = conjugate(P)
    e = s_prime / (m * p) + alpha * s_prime / (m * n) - s_prime / p_i
    return _class_report(
        "thm6", fam, [(u, r_i), (v, r_i * (1.0 - Pp))],
        lambda a, mn, vol: vol**e * a[:, 0] ** (s_prime / (r_i * m * p))
        * a[:, 1] ** (1.0 / (r_i * Pp)),
        quad_tol, strict=strict, growth_factor=growth_factor,
        params={"p_i": p_i, "p": p, "r_i": r_i, "alpha": alpha, "s_prime": s_prime, "m": m},
    )


@dataclass(frozen=True)
class RemarkCheck:
    """Outcome of the bumped-condition to pair-class implication check."""

    holds: bool | None
    margin: float
    skipped: bool
    reason: str
    cond7: ClassReport
    pair: ClassReport | None

    def __iter__(self):
        return iter((self.holds, self.margin))


def remark2_implication_check(u, v, params, fam, quad_tol=1e-3):
    """Check that a pair passing the bumped condition lies in the pair class.

    ``params`` holds ``p_i, q_i, r_i, alpha, s_prime, m``. The pair class is
    evaluated at ``(p_i/s', q_i/s', alpha s'/m)``; ``margin`` is the ratio of
    its sup to the bumped sup (at most 1 by Jensen on every cube). If the
    bumped condition itself diverges the check is skipped.
    """
    p_i, q_i, s_prime = float(params["p_i"]), float(params["q_i"]), float(params["s_prime"])
    alpha, m = float(params["alpha"]), int(params["m"])
    c7 = cond7_constant(u, v, p_i, q_i, params["r_i"], alpha, s_prime, m, fam, quad_tol)
    if not c7.finite:
        return RemarkCheck(None, math.nan, True, "precondition failed: bumped condition diverges",
                           c7, None)
    pr = pair_alpha_constant(u, v, p_i / s_prime, q_i / s_prime, alpha * s_prime / m, fam, quad_tol)
    margin = pr.sup_estimate / c7.sup_estimate
    return RemarkCheck(pr.finite, margin, False, "", c7, pr)


def perturb_epsilon_search(w, p, q, alpha, s_prime, fam, eps_grid, quad_tol=1e-3):
    """Largest grid ``eps`` with both perturbed memberships on ``fam``.

    With ``W = w^s'`` the memberships are ``W in A(p/s', q_eps/s')`` for
    ``1/q_eps = 1/p - (alpha +- eps)/n``. Returns ``(eps_best, reports)``;
    each report is ``(eps, plus_report, minus_report, passed)``. Raises
    :class:`NoFeasibleEpsilon` (inconclusive on a finite family) when no
    grid point passes.
    """
    n = fam.dim
    p, q, alpha, s_prime = map(float, (p, q, alpha, s_prime))
    w = _as_weight(w, fam)
    W = w.pow(s_prime)
    P = p / s_prime
    base = apq_constant(W, P, q / s_prime, fam, quad_tol)
    if not base.finite:
        raise HypothesisViolation("w^s' in A(p/s', q/s')", "unperturbed class functional diverges")
    bound = min(alpha, n / p - alpha, n / conjugate(q))
    reports = []
    best = None
    for eps in sorted(float(e) for e in eps_grid):
        if not 0.0 < eps < bound:
            raise HypothesisViolation(
                "0 < eps < min{alpha, n/p - alpha, n/q'}", f"eps={eps:g}, bound={bound:g}"
            )
        inv_plus = 1.0 / p - (alpha + eps) / n
        inv_minus = 1.0 / p - (alpha - eps) / n
        plus = apq_constant(W, P, 1.0 / (inv_plus * s_prime), fam, quad_tol)
        minus = apq_constant(W, P, 1.0 / (inv_minus * s_prime), fam, quad_tol)
        ok = plus.finite and minus.finite
        reports.append((eps, plus, minus, ok))
        if ok:
            best = eps
    if best is None:
        raise NoFeasibleEpsilon(
            "no grid epsilon passed on the sampled family (inconclusive, not a refutation)",
            reports=reports,
        )
    return best, reports
