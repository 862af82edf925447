"""Exponent algebra for the multilinear fractional operators.

All relations between the input exponents ``p_i``, the order ``alpha`` and
the kernel integrability exponent ``s`` live here, together with the checks
that every boundedness statement imposes on them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .exceptions import HypothesisViolation

__all__ = [
    "ExponentConfig",
    "ProofExponents",
    "conjugate",
    "derive_exponents",
    "proof_exponents",
]

_REL_EPS = 1e-12


def conjugate(p):
    """Hoelder conjugate ``p' = p/(p-1)``; ``1 -> inf`` and ``inf -> 1``."""
    p = float(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    if p < 1.0:
        raise ValueError(f"conjugate exponent undefined for p={p} < 1")
    return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentConfig:
    m: int
    n: int
    alpha: float
    s: float
    s_prime: float
    p_in: tuple
    q_per_factor: tuple
    p_out: float

    @property
    def mn(self):
        return self.m * self.n

    @property
    def inv_p_out(self):
        return sum(1.0 / p for p in self.p_in) - self.alpha / self.n

    def at_order(self, alpha):
        """Same factors and kernel exponent, different order ``alpha``."""
        return derive_exponents(self.m, self.n, alpha, self.s, self.p_in)

    def with_inputs(self, p_in):
        return derive_exponents(self.m, self.n, self.alpha, self.s, p_in)

    def to_dict(self):
        d = asdict(self)
        d["p_in"] = list(self.p_in)
        d["q_per_factor"] = list(self.q_per_factor)
        return d


def derive_exponents(m, n, alpha, s, p_in):
    """Build a validated :class:`ExponentConfig`.

    ``p_out`` solves ``1/p = sum(1/p_i) - alpha/n`` and the per-factor targets
    solve ``1/q_i = 1/p_i - alpha/(m n)``. ``s`` may be ``math.inf`` (bounded
    kernels), in which case ``s' = 1``.

    Raises
    ------
    HypothesisViolation
        With the violated condition as ``.hypothesis``.
    """
    m = int(m)
    n = int(n)
    alpha = float(alpha)
    s = float(s)
    p_in = tuple(float(p) for p in p_in)
    if m < 1:
        raise HypothesisViolation("m >= 1", f"m={m}")
    if n < 1:
        raise HypothesisViolation("n >= 1", f"n={n}")
    if len(p_in) != m:
        raise HypothesisViolation("one exponent p_i per factor", f"got {len(p_in)} for m={m}")
    mn = m * n
    if not 0.0 < alpha < mn:
        raise HypothesisViolation("0 < alpha < mn", f"alpha={alpha}, mn={mn}")
    if not s > 1.0:
        raise HypothesisViolation("s > 1", f"s={s}")
    s_prime = conjugate(s)
    if not 1.0 <= s_prime < mn / alpha:
        raise HypothesisViolation("1 <= s' < mn/alpha", f"s'={s_prime:g}, mn/alpha={mn / alpha:g}")
    for i, p in enumerate(p_in):
        if not p >= 1.0:
            raise HypothesisViolation("1 <= p_i", f"p_{i + 1}={p}")
    inv_p = sum(1.0 / p for p in p_in) - alpha / n
    if not inv_p > 0.0:
        raise HypothesisViolation(
            "1/p = 1/p_1 + ... + 1/p_m - alpha/n > 0", f"1/p={inv_p:g}"
        )
    q = []
    for i, p in enumerate(p_in):
        inv_q = 1.0 / p - alpha / mn
        if not inv_q > 0.0:
            raise HypothesisViolation(
                "1/q_i = 1/p_i - alpha/(mn) > 0", f"1/q_{i + 1}={inv_q:g}"
            )
        q.append(1.0 / inv_q)
    return ExponentConfig(
        m=m,
        n=n,
        alpha=alpha,
        s=s,
        s_prime=s_prime,
        p_in=p_in,
        q_per_factor=tuple(q),
        p_out=1.0 / inv_p,
    )


@dataclass(frozen=True)
class ProofExponents:
    """Perturbed exponents used by the Hoelder splitting arguments.

    ``q1_eps``/``q2_eps`` (equal to ``beta1``/``beta2``) satisfy
    ``1/q = 1/p -+ eps/n``; ``l1``, ``l2``, ``g_per_factor`` and
    ``h_per_factor`` are the two-weight analogues and are ``None`` unless an
    explicit two-weight output exponent was supplied.
    """

    epsilon: float
    p_ref: float
    q1_eps: float
    q2_eps: float
    beta1: float
    beta2: float
    eps_bound: float
    l1: float | None = None
    l2: float | None = None
    g_per_factor: tuple | None = None
    h_per_factor: tuple | None = None
    notes: tuple = field(default_factory=tuple)

    def holder_split(self):
        """``p/(2 q1) + p/(2 q2)``; equals 1 up to rounding."""
        return self.p_ref / (2.0 * self.q1_eps) + self.p_ref / (2.0 * self.q2_eps)


def epsilon_bound(cfg, p_two_weight=None, r=None):
    """Upper end of the admissible perturbation interval.

    ``min{alpha, mn/s' - alpha, n/p}``; with ``p_two_weight`` the bound also
    includes ``mn (1/p_i - 1/(m p))`` for every factor and, if ``r`` is given,
    ``1/(p r_i')``.
    """
    p = cfg.p_out if p_two_weight is None else float(p_two_weight)
    terms = [cfg.alpha, cfg.mn / cfg.s_prime - cfg.alpha, cfg.n / p]
    if p_two_weight is not None:
        terms.extend(cfg.mn * (1.0 / pi - 1.0 / (cfg.m * p)) for pi in cfg.p_in)
        if r is not None:
            terms.extend(1.0 / (p * conjugate(ri)) for ri in r)
    return min(terms)


def proof_exponents(cfg, epsilon=None, p_two_weight=None, r=None):
    """Perturbation exponents for a validated configuration.

    ``epsilon`` defaults to half of :func:`epsilon_bound`.
    """
    bound = epsilon_bound(cfg, p_two_weight, r)
    if not bound > 0.0:
        raise HypothesisViolation("admissible epsilon interval is nonempty", f"bound={bound:g}")
    eps = 0.5 * bound if epsilon is None else float(epsilon)
    if not 0.0 < eps < bound:
        raise HypothesisViolation(
            "0 < eps < min{alpha, mn/s' - alpha, n/p, ...}", f"eps={eps:g}, bound={bound:g}"
        )
    p = cfg.p_out if p_two_weight is None else float(p_two_weight)
    n, m = cfg.n, cfg.m
    q1 = 1.0 / (1.0 / p - eps / n)
    q2 = 1.0 / (1.0 / p + eps / n)
    extra = {}
    if p_two_weight is not None:
        extra["l1"] = q1
        extra["l2"] = q2
        extra["g_per_factor"] = tuple(
            1.0 / (1.0 / (m * p) - eps / (m * n)) for _ in range(m)
        )
        extra["h_per_factor"] = tuple(
            1.0 / (1.0 / (m * p) + eps / (m * n)) for _ in range(m)
        )
    return ProofExponents(
        epsilon=eps,
        p_ref=p,
        q1_eps=q1,
        q2_eps=q2,
        beta1=q1,
        beta2=q2,
        eps_bound=bound,
        **extra,
    )
