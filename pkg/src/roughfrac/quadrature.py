"""Singular-kernel quadrature in block-polar coordinates.

Points of (R^n)^m are written ``ybar = t * theta`` with ``t = |ybar|`` the
block norm and ``theta`` on the block sphere ``{|theta| = 1}``; then
``d ybar = t^(mn-1) dt dmu(theta)`` with ``mu`` the cone measure. Radial
integration runs over dyadic shells ``[2^k delta, 2^(k+1) delta)``; the
angular factor uses a tensor rule on the block sphere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import BudgetExceeded

__all__ = [
    "DEFAULT_BUDGET",
    "ShellScheme",
    "angular_rule",
    "block_ball_volume",
    "block_sphere_measure",
    "integrate_singular",
    "ray_pass",
    "shell_decomposition",
]

DEFAULT_BUDGET = 2**24
RULES = ("midpoint-tensor", "monte-carlo")


def block_sphere_measure(m, n):
    """Total cone measure of the block sphere: ``sigma_{n-1}^m Gamma(n)^m / Gamma(mn)``."""
    log_sigma = math.log(2.0) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n)
    return float(math.exp(m * log_sigma + m * gammaln(n) - gammaln(m * n)))


def block_ball_volume(m, n, radius=1.0):
    """Lebesgue measure of ``{ybar : |y_1| + ... + |y_m| < radius}``."""
    return block_sphere_measure(m, n) * radius ** (m * n) / (m * n)


def shell_decomposition(delta, inner=None, outer=None):
    """Radial intervals of the dyadic shell decomposition around ``delta``.

    ``inner=(j0, j1)`` yields ``[2^(-j-1) delta, 2^(-j) delta)`` for
    ``j0 <= j <= j1``; ``outer=(j0, j1)`` yields ``[2^j delta, 2^(j+1) delta)``.
    The result is sorted ascending.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    out = []
    if inner is not None:
        j0, j1 = inner
        if j1 < j0:
            raise ValueError("empty inner range")
        out.extend((math.ldexp(delta, -j - 1), math.ldexp(delta, -j)) for j in range(j0, j1 + 1))
    if outer is not None:
        j0, j1 = outer
        if j1 < j0:
            raise ValueError("empty outer range")
        out.extend((math.ldexp(delta, j), math.ldexp(delta, j + 1)) for j in range(j0, j1 + 1))
    if inner is None and outer is None:
        raise ValueError("need an inner or outer range")
    return sorted(out)


@dataclass(frozen=True)
class ShellScheme:
    """Shells ``[2^k delta, 2^(k+1) delta)`` for signed ``j_min <= k <= j_max``.

    Negative ``k`` are the inner shells (``k = -j-1``), nonnegative ``k`` the
    outer ones. ``points_per_shell`` is the node count along each continuous
    coordinate of a shell (radial and angular).
    """

    delta: float = 1.0
    j_min: int = -16
    j_max: int = 4
    points_per_shell: int = 8
    rule: str = "midpoint-tensor"
    seed: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.j_max < self.j_min:
            raise ValueError("j_max must be >= j_min")
        if self.points_per_shell < 1:
            raise ValueError("points_per_shell must be positive")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")

    def edges(self, j_min=None, j_max=None):
        lo = self.j_min if j_min is None else j_min
        hi = self.j_max if j_max is None else j_max
        return np.array([math.ldexp(self.delta, k) for k in range(lo, hi + 2)])


# angular rule on the block sphere ---------------------------------------------

def _continuous_dims(m, n):
    return (m - 1) + (m * (n - 1) if n >= 2 else 0)


def angular_rule(m, n, k, rule="midpoint-tensor", seed=0):
    """Nodes and weights for integrals over the block sphere with cone measure.

    Returns ``theta`` of shape ``(K, m, n)`` (each node has block norm 1) and
    ``weights`` of shape ``(K,)``. Simplex coordinates use the stretching
    ``b = sin^2(pi s / 2)`` so endpoint singularities are damped; sphere
    coordinates are hyperspherical angles. ``monte-carlo`` jitters each node
    uniformly inside its tensor cell (stratified sampling).
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    D = _continuous_dims(m, n)
    k = int(k)
    if D == 0:
        s = np.zeros((1, 0))
    else:
        grid = np.stack(
            np.meshgrid(*([np.arange(k)] * D), indexing="ij"), axis=-1
        ).reshape(-1, D).astype(float)
        if rule == "midpoint-tensor":
            s = (grid + 0.5) / k
        else:
            rng = np.random.default_rng(seed)
            s = (grid + rng.random(grid.shape)) / k
    cell = (1.0 / k) ** D if D else 1.0
    return _map_block_sphere(s, m, n, cell)


def _map_block_sphere(s, m, n, cell):
    K = s.shape[0]
    w = np.full(K, cell)
    col = 0
    # simplex via stick breaking on stretched coordinates
    rho = np.ones((K, m))
    remaining = np.ones(K)
    for j in range(m - 1):
        sj = s[:, col]
        col += 1
        b = np.sin(0.5 * np.pi * sj) ** 2
        # d rho_j / d b_j = remaining (triangular Jacobian of stick breaking)
        w = w * 0.5 * np.pi * np.sin(np.pi * sj) * remaining
        rho[:, j] = remaining * b
        remaining = remaining * (1.0 - b)
    rho[:, m - 1] = remaining
    if n > 1:
        w = w * np.prod(rho ** (n - 1), axis=1)
    if n == 1:
        signs = np.array(list(itertools.product([-1.0, 1.0], repeat=m)))
        theta = (rho[:, None, :] * signs[None, :, :]).reshape(-1, m, 1)
        w = np.repeat(w, len(signs))
        return theta, w
    omega = np.empty((K, m, n))
    for i in range(m):
        angles = s[:, col:col + n - 1]
        col += n - 1
        vec, jac = _sphere_from_angles(angles, n)
        omega[:, i, :] = vec
        w = w * jac
    theta = rho[:, :, None] * omega
    return theta, w


def _sphere_from_angles(u, n):
    """Map ``u`` in ``[0,1]^(n-1)`` to S^{n-1}; returns points and Jacobian factor."""
    K = u.shape[0]
    vec = np.empty((K, n))
    jac = np.ones(K)
    sin_prod = np.ones(K)
    for j in range(n - 2):
        phi = np.pi * u[:, j]
        vec[:, j] = sin_prod * np.cos(phi)
        jac = jac * np.pi * np.sin(phi) ** (n - 2 - j)
        sin_prod = sin_prod * np.sin(phi)
    phi = 2.0 * np.pi * u[:, n - 2]
    vec[:, n - 2] = sin_prod * np.cos(phi)
    vec[:, n - 1] = sin_prod * np.sin(phi)
    jac = jac * 2.0 * np.pi
    return vec, jac


# generic shell integrator ---------------------------------------------------

def _geometric_tail(c_edge, c_next):
    """Estimate of the remaining geometric series beyond an edge shell."""
    a, b = abs(c_edge), abs(c_next)
    if a == 0.0:
        return 0.0
    if b == 0.0 or a >= b:
        return math.inf
    r = a / b
    return a * r / (1.0 - r)


def integrate_singular(integrand, scheme, tol, *, m, n, budget=DEFAULT_BUDGET, max_levels=8):
    """Integrate ``integrand`` over (R^n)^m by summing dyadic shells.

    ``integrand`` maps an ``(N, m*n)`` array of points to ``N`` values and may
    be singular only at the origin. Each refinement level doubles the nodes
    per coordinate and the number of shells on both sides; iteration stops
    when the level-to-level change plus a geometric estimate of the missing
    innermost/outermost shells is below ``tol`` times the value.

    Returns ``(value, err_est)``; raises :class:`BudgetExceeded` carrying the
    partial value when ``budget`` integrand evaluations do not suffice.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    mn = m * n
    evals = 0
    prev = None
    value, err = 0.0, math.inf
    for level in range(max_levels):
        pps = scheme.points_per_shell * 2**level
        lo = scheme.j_min * 2**level if scheme.j_min < 0 else scheme.j_min
        hi = (scheme.j_max + 1) * 2**level - 1 if scheme.j_max >= 0 else scheme.j_max
        theta, wt = angular_rule(m, n, pps, scheme.rule, scheme.seed + level)
        xi, wxi = np.polynomial.legendre.leggauss(pps)
        flat_theta = theta.reshape(len(wt), mn)
        edges = scheme.edges(lo, hi)
        shells = np.empty(len(edges) - 1)
        for j in range(len(edges) - 1):
            a, b = edges[j], edges[j + 1]
            t = a + (b - a) * 0.5 * (xi + 1.0)
            wr = 0.5 * (b - a) * wxi * t ** (mn - 1)
            pts = t[:, None, None] * flat_theta[None, :, :]
            vals = np.asarray(integrand(pts.reshape(-1, mn)), dtype=float).reshape(len(t), len(wt))
            shells[j] = float(wr @ vals @ wt)
            evals += vals.size
        # ascending shell order keeps the reduction deterministic
        value = float(np.sum(shells))
        tail = 0.0
        if len(shells) >= 2:
            tail = _geometric_tail(shells[0], shells[1]) + _geometric_tail(shells[-1], shells[-2])
        change = math.inf if prev is None else abs(value - prev)
        err = change + tail
        if prev is not None and (err <= tol * abs(value) or (value == 0.0 and err == 0.0)):
            return value, err
        if evals > budget:
            raise BudgetExceeded(
                f"integrate_singular used {evals} evaluations without reaching tol={tol:g}",
                value=value,
                err_est=err,
            )
        prev = value
    raise BudgetExceeded(
        f"integrate_singular did not converge in {max_levels} levels", value=value, err_est=err
    )


# exact radial integration along rays -----------------------------------------

_GL_CACHE = {}


def _gauss(G):
    if G not in _GL_CACHE:
        _GL_CACHE[G] = np.polynomial.legendre.leggauss(G)
    return _GL_CACHE[G]


def _ray_breakpoints(functions, x, theta):
    """Sorted radial breakpoints per ray, as an array of shape (K, P)."""
    K = theta.shape[0]
    cols = [np.zeros((K, 1))]
    for i, f in enumerate(functions):
        for d in range(f.dim):
            planes = f.breakpoint_planes(d)
            th = theta[:, i, d]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (x[d] - planes[None, :]) / th[:, None]
            t[~(t > 0.0) | ~np.isfinite(t)] = np.nan
            cols.append(t)
    return np.concatenate(cols, axis=1)


def ray_pass(functions, x, theta, weights, omega, alpha, edges, chunk_elems=300_000):
    """Integrate the product of ``functions`` along every ray from ``x``.

    For ray ``theta`` with weight ``w`` and kernel value ``Omega``, the pass
    accumulates

    * ``signed``: ``sum w Omega int_0^inf t^(alpha-1) g(t) dt``
    * ``absolute``: same with ``|Omega| |g|``
    * ``bins``: ``sum w |Omega| int t^(mn-1) |g(t)| dt`` split by the radial
      ``edges`` (bin ``k`` covers ``[edges[k-1], edges[k])``, bin 0 starts at 0)

    where ``g(t) = prod_i f_i(x - t theta_i)``. The radial integrals are exact
    between breakpoints for nearest interpolation and Gauss-Legendre exact
    for the polynomial pieces of multilinear interpolation.
    """
    m, n = theta.shape[1], theta.shape[2]
    mn = m * n
    x = np.asarray(x, dtype=float).reshape(n)
    edges = np.asarray(edges, dtype=float)
    multilinear = any(f.interp == "multilinear" for f in functions)
    G = max(4, mn + 1) if multilinear else 1
    nb = len(edges) + 1
    signed = 0.0
    absolute = 0.0
    bins = np.zeros(nb)
    abs_bins = np.zeros(nb)
    evals = 0
    K = theta.shape[0]
    n_planes = 1 + sum(len(f.breakpoint_planes(d)) for f in functions for d in range(f.dim))
    P = n_planes + len(edges)
    step = max(1, chunk_elems // max(P * G, 1))
    for start in range(0, K, step):
        th = theta[start:start + step]
        wk = weights[start:start + step]
        om = omega[start:start + step]
        kc = th.shape[0]
        bp = _ray_breakpoints(functions, x, th)
        bp = np.concatenate([bp, np.broadcast_to(edges, (kc, len(edges)))], axis=1)
        bp = np.sort(bp, axis=1)
        rowmax = np.nanmax(bp, axis=1, keepdims=True)
        bp = np.where(np.isnan(bp), rowmax, bp)
        lo = bp[:, :-1]
        hi = bp[:, 1:]
        if G == 1:
            mid = 0.5 * (lo + hi)
            g = _product(functions, x, th, mid)
            mom_i = (hi**alpha - lo**alpha) / alpha
            mom_f = (hi**mn - lo**mn) / mn
            gi = g * mom_i
            gf = np.abs(g) * mom_f
            gi_abs = np.abs(g) * mom_i
            evals += g.size * m
        else:
            xi, wxi = _gauss(G)
            ua, ub = lo**alpha, hi**alpha
            u = ua[..., None] + (ub - ua)[..., None] * 0.5 * (xi + 1.0)
            t_i = u ** (1.0 / alpha)
            g_i = _product(functions, x, th, t_i)
            wi = ((ub - ua) * 0.5 / alpha)[..., None] * wxi
            gi = np.sum(g_i * wi, axis=-1)
            gi_abs = np.sum(np.abs(g_i) * wi, axis=-1)
            t_f = lo[..., None] + (hi - lo)[..., None] * 0.5 * (xi + 1.0)
            g_f = _product(functions, x, th, t_f)
            wf = (0.5 * (hi - lo))[..., None] * wxi * t_f ** (mn - 1)
            gf = np.sum(np.abs(g_f) * wf, axis=-1)
            evals += (g_i.size + g_f.size) * m
        ray_w = wk * om
        ray_wabs = wk * np.abs(om)
        signed += float(ray_w @ np.sum(gi, axis=1))
        absolute += float(ray_wabs @ np.sum(gi_abs, axis=1))
        idx = np.searchsorted(edges, lo, side="right")
        bins += np.bincount(idx.ravel(), weights=(gf * ray_wabs[:, None]).ravel(), minlength=nb)
        abs_bins += np.bincount(idx.ravel(), weights=(gi_abs * ray_wabs[:, None]).ravel(), minlength=nb)
    return {
        "signed": signed,
        "absolute": absolute,
        "bins": bins,
        "abs_bins": abs_bins,
        "evals": evals,
    }


def _product(functions, x, theta, t):
    """``prod_i f_i(x - t theta_i)`` for ray parameters ``t`` of shape (K, ...)."""
    extra = t.ndim - 1
    out = None
    for i, f in enumerate(functions):
        th = theta[:, i, :].reshape((theta.shape[0],) + (1,) * extra + (theta.shape[2],))
        z = x - t[..., None] * th
        v = f(z)
        out = v if out is None else out * v
    return out
