"""Point and field evaluation of rough multilinear fractional operators.

For ``f = (f_1, ..., f_m)`` on R^n, a kernel ``Omega`` homogeneous of degree
zero on R^{mn} and ``0 < alpha < mn``::

    I(f)(x) = int Omega(ybar) |ybar|^(alpha - mn) prod_i f_i(x - y_i) d ybar
    M(f)(x) = sup_r r^(alpha - mn) int_{|ybar| < r} |Omega| prod_i |f_i(x - y_i)| d ybar

with the block norm ``|ybar| = |y_1| + ... + |y_m|``. Both are computed from
one pass over rays ``ybar = t theta`` leaving the origin: the radial integral
along each ray is exact between the breakpoints where ``x - t theta_i``
crosses a grid plane of ``f_i``, and the angular integral over the block
sphere is refined until it stabilizes. The supremum over ``r`` is taken on a
geometric radius grid anchored at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import BudgetExceeded, HypothesisViolation, RoughFracError
from .functions import SampledFunction
from .kernels import KernelSpec
from .quadrature import DEFAULT_BUDGET, RULES, angular_rule, ray_pass

__all__ = [
    "EvalSettings",
    "Profile",
    "eval_I",
    "eval_M",
    "eval_field",
    "lemma1_constant",
    "lemma1_majorant",
    "point_profile",
    "welland_constant",
    "welland_majorant",
]

OPS = ("I", "M", "I_smooth", "M_smooth")


@dataclass(frozen=True)
class EvalSettings:
    """Discretization knobs for the operator evaluators.

    Radii are ``r0 * 2^(j/rho)`` for ``k_min*rho <= j <= k_max*rho``. When
    ``k_min``/``k_max`` are ``None`` they are chosen per point from the
    support radius ``R``: from about ``R * 2^-depth`` up to the first power
    of two above ``2R``. ``x_origin``, ``x_spacing`` and ``x_shape`` describe
    the evaluation grid of :func:`eval_field` (cell centers).
    """

    quad_tol: float = 1e-3
    r0: float = 1.0
    k_min: int | None = None
    k_max: int | None = None
    rho: int = 4
    depth: int = 30
    x_origin: tuple | None = None
    x_spacing: float | None = None
    x_shape: tuple | None = None
    rule: str = "midpoint-tensor"
    seed: int = 0
    k0: int = 8
    max_levels: int = 10
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if int(self.rho) != self.rho or self.rho < 1:
            raise ValueError("rho must be a positive integer")
        if (self.k_min is None) != (self.k_max is None):
            raise ValueError("k_min and k_max must be given together")
        if self.k_min is not None and self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        if self.k0 < 1:
            raise ValueError("k0 must be positive")

    def radii(self, support_radius=1.0):
        """Strictly increasing radius grid used for the supremum."""
        if self.k_min is not None:
            lo, hi = self.k_min, self.k_max
        else:
            e = math.ceil(math.log2(max(support_radius, 1e-300) / self.r0))
            lo, hi = e - self.depth, e + 1
        rho = int(self.rho)
        j = np.arange(lo * rho, hi * rho + 1)
        return self.r0 * np.ldexp(2.0 ** ((j % rho) / rho), j // rho)

    def slack(self, mn, alpha):
        """Factor by which the true supremum can exceed the grid maximum."""
        return 2.0 ** ((mn - alpha) / self.rho)

    def x_points(self):
        """Cell centers of the evaluation grid, shape ``(N, n)``."""
        if self.x_origin is None or self.x_spacing is None or self.x_shape is None:
            raise ValueError("x grid is not configured")
        return self.x_sampled(np.zeros(tuple(self.x_shape))).cell_centers()

    def x_sampled(self, values):
        return SampledFunction(
            len(self.x_shape), tuple(self.x_origin), float(self.x_spacing),
            tuple(int(k) for k in self.x_shape), np.asarray(values, dtype=float),
        )

    def with_grid(self, origin, spacing, shape):
        return replace(self, x_origin=tuple(np.atleast_1d(origin).astype(float)),
                       x_spacing=float(spacing), x_shape=tuple(np.atleast_1d(shape).astype(int)))


@dataclass(frozen=True)
class Profile:
    """Everything one ray pass yields at a point.

    ``I`` is the signed integral, ``I_abs`` the integral with ``|Omega|`` and
    ``|f_i|``; ``radii``/``ball`` hold the ball integrals ``F(r)`` of
    ``|Omega| prod |f_i|`` on the radius grid; ``M`` maps each requested
    order to its grid maximum and ``argmax`` to the maximizing radius.
    """

    I: float
    I_abs: float
    radii: np.ndarray
    ball: np.ndarray
    M: dict
    argmax: dict
    err_est: float
    level: int
    evals: int
    shell_abs: np.ndarray = field(default=None, repr=False)


def _maximal_from_ball(radii, ball, order, mn):
    vals = radii ** (order - mn) * ball
    k = int(np.argmax(vals))
    return float(vals[k]), float(radii[k])


def _check_inputs(functions, kernel, m, n):
    if len(functions) != m:
        raise HypothesisViolation("one function per factor", f"got {len(functions)} for m={m}")
    for f in functions:
        if f.dim != n:
            raise HypothesisViolation("f_i defined on R^n", f"dim={f.dim}, n={n}")
    if kernel.m != m or kernel.n != n:
        raise HypothesisViolation("kernel defined on R^(mn)", f"kernel m={kernel.m}, n={kernel.n}")


def point_profile(functions, kernel, alpha, x, settings=None, orders=()):
    """Ray pass at ``x`` with angular refinement until the outputs settle.

    Convergence requires the change of ``I`` (measured against ``I_abs``)
    and of every maximal value in ``orders`` to be below ``quad_tol``.
    Raises :class:`BudgetExceeded` with the last ``I`` when the evaluation
    budget runs out first.
    """
    settings = settings or EvalSettings()
    functions = tuple(functions)
    m, n = kernel.m, kernel.n
    _check_inputs(functions, kernel, m, n)
    mn = m * n
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n,):
        raise ValueError(f"x must have {n} coordinates")
    orders = tuple(float(o) for o in orders)
    support = sum(f.max_distance(x) for f in functions)
    radii = settings.radii(support)
    if any(not np.any(f.values) for f in functions):
        zeros = np.zeros(len(radii))
        return Profile(0.0, 0.0, radii, zeros, {o: 0.0 for o in orders},
                       {o: float(radii[0]) for o in orders}, 0.0, 0, 0, zeros)
    dims = (m - 1) + (m * (n - 1) if n >= 2 else 0)
    evals = 0
    prev = None
    for level in range(settings.max_levels):
        k = settings.k0 * 2**level
        theta, w = angular_rule(m, n, k, settings.rule, settings.seed + level)
        omega = kernel.evaluate(theta.reshape(len(w), mn))
        res = ray_pass(functions, x, theta, w, omega, alpha, radii)
        evals += res["evals"]
        ball = np.cumsum(res["bins"])[:-1]
        mvals, arg = {}, {}
        for o in orders:
            mvals[o], arg[o] = _maximal_from_ball(radii, ball, o, mn)
        cur = Profile(res["signed"], res["absolute"], radii, ball, mvals, arg,
                      math.inf, level, evals, res["abs_bins"])
        if dims == 0:
            return replace(cur, err_est=0.0)
        if prev is not None:
            scale_i = max(cur.I_abs, 1e-300)
            err = abs(cur.I - prev.I) + abs(cur.I_abs - prev.I_abs)
            ok = err <= settings.quad_tol * scale_i or cur.I_abs == 0.0
            rel_m = 0.0
            for o in orders:
                d = abs(cur.M[o] - prev.M[o])
                rel_m = max(rel_m, d / max(cur.M[o], 1e-300))
                ok = ok and (d <= settings.quad_tol * cur.M[o] or cur.M[o] == 0.0)
            cur = replace(cur, err_est=err)
            if ok:
                return cur
        if evals > settings.budget:
            raise BudgetExceeded(
                f"operator evaluation at x={x.tolist()} exceeded {settings.budget} evaluations",
                value=cur.I,
                err_est=cur.err_est,
            )
        prev = cur
    raise BudgetExceeded(
        f"operator evaluation at x={x.tolist()} did not settle in {settings.max_levels} levels",
        value=prev.I,
        err_est=prev.err_est,
    )


def _alpha(cfg):
    return float(cfg.alpha)


def eval_I(f, k, cfg, x, settings=None):
    """Signed fractional integral at ``x``."""
    return point_profile(f, k, _alpha(cfg), x, settings).I


def eval_M(f, k, cfg, x, settings=None):
    """Fractional maximal value at ``x`` (grid maximum over radii)."""
    a = _alpha(cfg)
    return point_profile(f, k, a, x, settings, orders=(a,)).M[a]


def _lemma_order(cfg):
    s_prime = float(cfg.s_prime)
    order = cfg.alpha * s_prime
    if not order < cfg.mn:
        raise HypothesisViolation("alpha s' < mn", f"alpha s'={order:g}, mn={cfg.mn}")
    return order, s_prime


def lemma1_majorant(f, cfg, x, settings=None):
    """``[M_{alpha s'}(|f_1|^s', ..., |f_m|^s')(x)]^(1/s')`` with the unit kernel."""
    order, s_prime = _lemma_order(cfg)
    powered = tuple(fi.abs_power(s_prime) for fi in f)
    unit = KernelSpec.constant(1.0, cfg.m, cfg.n)
    val = point_profile(powered, unit, order, x, settings, orders=(order,)).M[order]
    return val ** (1.0 / s_prime)


def lemma1_constant(k, s=None, resolution=2048):
    """Hoelder constant ``K^(1/s)`` with ``K = (1/mn) int |Omega|^s d mu``.

    ``mu`` is the cone measure of the block sphere, so ``K r^mn`` is the
    integral of ``|Omega|^s`` over the block ball of radius ``r``. For
    ``s = inf`` the result is the maximum of ``|Omega|`` on the nodes.
    """
    s = k.s if s is None else float(s)
    m, n = k.m, k.n
    dims = (m - 1) + (m * (n - 1) if n >= 2 else 0)
    per_axis = max(2, int(round(resolution ** (1.0 / dims)))) if dims else 1
    theta, w = angular_rule(m, n, per_axis)
    vals = np.abs(k.evaluate(theta.reshape(len(w), m * n)))
    if math.isinf(s):
        return float(np.max(vals))
    K = float(w @ vals**s) / (m * n)
    return K ** (1.0 / s)


def welland_constant(epsilon, mn, alpha):
    """``2 * 2^(mn - alpha) / (1 - 2^-eps)`` from the two dyadic-shell series."""
    return 2.0 * 2.0 ** (mn - alpha) / (1.0 - 2.0 ** (-epsilon))


@dataclass(frozen=True)
class WellandResult:
    bound: float
    c_proof: float
    delta: float
    m_plus: float
    m_minus: float
    I: float
    I_abs: float

    def __iter__(self):
        return iter((self.bound, self.c_proof))


def welland_majorant(f, k, cfg, x, epsilon, settings=None):
    """Geometric mean of the maximal values at orders ``alpha +- epsilon``.

    Unpacks as ``(bound, C_proof)``; the result also carries the equalizing
    split radius ``delta = (M_+/M_-)^(1/(2 eps))`` and the integral values
    from the same pass.
    """
    a, mn = _alpha(cfg), cfg.mn
    eps = float(epsilon)
    if not 0.0 < eps < min(a, mn - a):
        raise HypothesisViolation(
            "0 < eps < min{alpha, mn - alpha}", f"eps={eps:g}, alpha={a:g}, mn={mn}"
        )
    prof = point_profile(f, k, a, x, settings, orders=(a + eps, a - eps))
    mp, mm = prof.M[a + eps], prof.M[a - eps]
    bound = math.sqrt(mp) * math.sqrt(mm)
    delta = (mp / mm) ** (1.0 / (2.0 * eps)) if mp > 0 and mm > 0 else math.nan
    return WellandResult(bound, welland_constant(eps, mn, a), delta, mp, mm, prof.I, prof.I_abs)


def eval_field(op_id, f, k, cfg, settings):
    """Tabulate an operator on the cell centers of ``settings``' x grid.

    ``op_id`` is one of ``I``, ``M``, ``I_smooth``, ``M_smooth``; the smooth
    variants replace ``k`` by the unit kernel. Errors at a point are
    re-raised with that point attached.
    """
    if op_id not in OPS:
        raise ValueError(f"op_id must be one of {OPS}")
    pts = settings.x_points()
    if len(pts) == 0:
        raise ValueError("x grid is empty")
    kern = KernelSpec.constant(1.0, cfg.m, cfg.n) if op_id.endswith("_smooth") else k
    fn = eval_I if op_id.startswith("I") else eval_M
    out = np.empty(len(pts))
    for i, x in enumerate(pts):
        try:
            out[i] = fn(f, kern, cfg, x, settings)
        except RoughFracError as exc:
            exc.x = x.tolist()
            raise
    return settings.x_sampled(out.reshape(tuple(settings.x_shape)))
