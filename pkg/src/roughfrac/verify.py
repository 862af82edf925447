"""Executable inequality checks over seeded test batteries.

A :class:`TestBattery` is a list of cases (exponents, kernel, function tuple)
plus evaluation points. Pointwise checks run at every (case, point) pair;
norm checks tabulate the operator on the battery grid and compare grid
norms. Operator values for a case and point come from a single ray pass
that serves every order the checks need, and are cached on the battery so
that checks sharing a battery share the numbers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, HypothesisViolation, RoughFracError
from .exponents import derive_exponents, proof_exponents
from .functions import indicator, random_piecewise, tent
from .kernels import KernelSpec
from .norms import lp_norm, weak_lp_quasinorm, weighted_norm, weighted_weak_quasinorm, NormSpec
from .operators import (
    EvalSettings,
    lemma1_constant,
    point_profile,
    welland_constant,
)
from .weights import (
    CubeFamily,
    WeightSpec,
    apq_constant,
    cond7_constant,
    pair_alpha_constant,
    remark2_implication_check,
    thm6_condition_constant,
)

__all__ = [
    "BatteryCase",
    "InstanceRecord",
    "TestBattery",
    "VerificationReport",
    "WeightSetup",
    "build_battery",
    "check_collapse_chain",
    "check_lemma_to_theorem",
    "check_pointwise_lemma1",
    "check_remark2",
    "check_scaling_homogeneity",
    "check_strong_type",
    "check_theorem33",
    "check_weak_type",
    "check_welland",
    "config_hash",
    "paper_core_battery",
    "lemma_battery",
    "run_suite",
    "write_csv",
    "write_json",
    "reports_to_csv",
    "reports_to_json",
]

SCHEMA = "roughfrac.suite/1"
STRONG_IDS = ("T1i", "T2i", "T3", "T4", "T5", "T6")
WEAK_IDS = ("T1ii", "T2ii", "T7")
MAXIMAL_IDS = ("T1i", "T1ii", "T3", "T5", "T7")


# data types ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BatteryCase:
    cfg: object
    kernel: KernelSpec
    functions: tuple
    label: str = ""

    def describe(self):
        return {
            "label": self.label,
            "exponents": self.cfg.to_dict(),
            "kernel": self.kernel.describe(),
            "functions": [repr(f) for f in self.functions],
        }


@dataclass(eq=False)
class TestBattery:
    """Cases, pointwise evaluation points and the field grid settings.

    ``points`` defaults to the cell centers of the settings' x grid.
    """

    cases: list
    settings: EvalSettings
    points: np.ndarray | None = None
    name: str = "battery"
    _cache: dict = field(default_factory=dict, repr=False)

    __test__ = False

    def __post_init__(self):
        if self.points is None and self.settings.x_shape is not None:
            self.points = self.settings.x_points()
        if self.points is not None:
            self.points = np.asarray(self.points, dtype=float)
            if self.points.ndim == 1:
                self.points = self.points[:, None]

    def __len__(self):
        return len(self.cases) * (0 if self.points is None else len(self.points))

    def instances(self):
        for ci in range(len(self.cases)):
            for pi in range(len(self.points)):
                yield ci, pi

    def validate(self):
        """Every input function has finite grid norms at its exponent."""
        for case in self.cases:
            for f, p in zip(case.functions, case.cfg.p_in):
                if not math.isfinite(lp_norm(f, p)):
                    raise HypothesisViolation("f_i in L^p_i", f"case {case.label}")
        return self

    # cached ray passes ------------------------------------------------------

    def orders(self, case, extra=()):
        cfg = case.cfg
        out = {cfg.alpha}
        eps_w = welland_epsilon(cfg)
        out.update((cfg.alpha + eps_w, cfg.alpha - eps_w))
        try:
            eps_p = proof_exponents(cfg).epsilon
            out.update((cfg.alpha + eps_p, cfg.alpha - eps_p))
        except HypothesisViolation:
            pass
        out.update(extra)
        return tuple(sorted(out))

    def profile(self, ci, x, kind="main"):
        """Ray-pass result for case ``ci`` at ``x``.

        ``kind`` is ``main`` (case kernel, signed functions), ``smooth``
        (unit kernel, same functions) or ``lemma1`` (unit kernel on
        ``|f_i|^s'`` at order ``alpha s'``).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        key = (ci, kind, x.tobytes())
        if key not in self._cache:
            case = self.cases[ci]
            cfg = case.cfg
            unit = KernelSpec.constant(1.0, cfg.m, cfg.n)
            if kind == "main":
                prof = point_profile(case.functions, case.kernel, cfg.alpha, x, self.settings,
                                     self.orders(case))
            elif kind == "smooth":
                prof = point_profile(case.functions, unit, cfg.alpha, x, self.settings, (cfg.alpha,))
            elif kind == "lemma1":
                order = cfg.alpha * cfg.s_prime
                powered = tuple(f.abs_power(cfg.s_prime) for f in case.functions)
                # the main pass's orders scaled by s', so at s' = 1 both passes
                # run the same refinement and agree exactly on |f|
                orders = {order} | {o * cfg.s_prime for o in self.orders(case) if o * cfg.s_prime < cfg.mn}
                prof = point_profile(powered, unit, order, x, self.settings, tuple(sorted(orders)))
            else:
                raise ValueError(kind)
            self._cache[key] = prof
        return self._cache[key]

    def field(self, ci, op, order=None):
        """Operator values over the x grid, as a SampledFunction."""
        case = self.cases[ci]
        order = case.cfg.alpha if order is None else order
        pts = self.settings.x_points()
        vals = np.empty(len(pts))
        for i, x in enumerate(pts):
            prof = self.profile(ci, x)
            vals[i] = prof.I if op == "I" else prof.M[order]
        return self.settings.x_sampled(vals.reshape(self.settings.x_shape))


@dataclass(frozen=True)
class WeightSetup:
    """Weights and exponents for the weighted theorems.

    ``w`` is the one-weight multiplier; ``u``/``v`` the two-weight pair;
    ``q`` per-factor targets (default: balanced), ``r`` bump exponents,
    ``p`` the explicit output exponent required by the bumped-``u`` check.
    """

    w: WeightSpec | None = None
    u: WeightSpec | None = None
    v: WeightSpec | None = None
    q: tuple | None = None
    r: tuple | None = None
    p: float | str | None = None
    family: CubeFamily = field(default_factory=lambda: CubeFamily.interval(-4.0, 4.0, level_max=7))

    def one(self, dim):
        return WeightSpec.constant(1.0, dim)

    def describe(self):
        d = {}
        for k in ("w", "u", "v"):
            val = getattr(self, k)
            if val is not None:
                d[k] = val.describe()
        for k in ("q", "r", "p"):
            val = getattr(self, k)
            if val is not None:
                d[k] = list(val) if isinstance(val, tuple) else val
        return d


@dataclass(frozen=True)
class InstanceRecord:
    instance_index: int
    config_hash: str
    lhs: float
    rhs: float
    constant: float
    passed: bool


@dataclass
class VerificationReport:
    """Outcome of one check on one battery.

    ``passed`` means every instance met its inequality at the stated
    tolerance, on the battery as sampled.
    """

    check_id: str
    config: dict
    empirical_constant: float
    theoretical_constant: float | None
    passed: bool
    witnesses: list = field(default_factory=list)
    runtime: float = 0.0
    instances: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    status: str = "ok"

    def summary(self):
        return {
            "id": self.check_id,
            "empirical_constant": _num(self.empirical_constant),
            "theoretical_constant": _num(self.theoretical_constant),
            "passed": bool(self.passed),
            "witness": self.witnesses[0] if self.witnesses else None,
            "status": self.status,
            "notes": list(self.notes),
            "config": self.config,
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def config_hash(obj):
    """Short sha256 of the canonical JSON form of ``obj``."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _ratio(a, b):
    if b == 0.0:
        return 0.0 if a == 0.0 else math.inf
    return a / b


def _finish(check_id, config, records, witnesses_src, theoretical, extra_pass=True, notes=()):
    if records:
        consts = [r.constant for r in records]
        k = int(np.argmax(consts))
        emp = float(consts[k])
        wit = [witnesses_src[k]]
    else:
        emp, wit = 0.0, []
    passed = bool(all(r.passed for r in records) and extra_pass)
    return VerificationReport(check_id, config, emp, theoretical, passed, wit,
                              instances=records, notes=list(notes))


def _empty(check_id, battery):
    msg = f"{check_id}: empty battery, passed vacuously"
    warnings.warn(msg, stacklevel=3)
    return VerificationReport(check_id, {"battery": battery.name}, 0.0, None, True, [],
                              notes=[msg])


def _battery_config(battery, **extra):
    d = {"battery": battery.name, "cases": len(battery.cases),
         "points": 0 if battery.points is None else len(battery.points)}
    d.update(extra)
    return d


def welland_epsilon(cfg):
    return 0.5 * min(cfg.alpha, cfg.mn - cfg.alpha)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.runtime = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.__wrapped__ = fn
    return wrapper


# pointwise checks -----------------------------------------------------------

def _lemma1_pair(battery, ci, x):
    case = battery.cases[ci]
    lhs = battery.profile(ci, x).M[case.cfg.alpha]
    rhs = battery.profile(ci, x, "lemma1").M[case.cfg.alpha * case.cfg.s_prime] ** (1.0 / case.cfg.s_prime)
    return lhs, rhs


def _is_collapse(case):
    return case.cfg.s_prime == 1.0 and case.kernel.is_constant and case.kernel.params["c"] == 1.0


@_timed
def check_pointwise_lemma1(battery):
    """Maximal values against the Hoelder majorant at every battery point.

    Each instance passes when ``M <= C_derived * majorant`` up to the
    quadrature tolerance, where ``C_derived`` is the Hoelder constant of
    the kernel on the block sphere. The empirical constant is the largest
    ratio ``M / majorant``; on cases with the unit kernel and ``s' = 1`` it
    must not exceed ``1 + 1e-6``.
    """
    if not battery.cases or battery.points is None or len(battery) == 0:
        return _empty("lemma1", battery)
    tol = battery.settings.quad_tol
    records, wits = [], []
    theo = 0.0
    collapse_max = 0.0
    consts = {}
    for ci, case in enumerate(battery.cases):
        cfg = case.cfg
        if not cfg.alpha * cfg.s_prime < cfg.mn:
            raise HypothesisViolation("alpha s' < mn", f"case {case.label}")
        consts[ci] = lemma1_constant(case.kernel, cfg.s)
        theo = max(theo, consts[ci])
    idx = 0
    for ci, pi in battery.instances():
        case = battery.cases[ci]
        x = battery.points[pi]
        lhs, rhs = _lemma1_pair(battery, ci, x)
        c = _ratio(lhs, rhs)
        ok = lhs <= consts[ci] * rhs * (1.0 + 10.0 * tol) + 1e-300 and math.isfinite(c)
        if _is_collapse(case):
            collapse_max = max(collapse_max, c)
        h = config_hash(case.describe())
        records.append(InstanceRecord(idx, h, lhs, rhs, c, bool(ok)))
        wits.append({"case": case.label, "x": x.tolist(), "config_hash": h})
        idx += 1
    rep = _finish("lemma1", _battery_config(battery), records, wits, theo,
                  extra_pass=collapse_max <= 1.0 + 1e-6,
                  notes=[f"unit-kernel s'=1 constant {collapse_max!r}"])
    rep.collapse_constant = collapse_max
    return rep


@_timed
def check_welland(battery, epsilon=None):
    """``|I| <= C_proof sqrt(M_{alpha+eps} M_{alpha-eps})`` at every point.

    ``epsilon`` defaults to half of ``min{alpha, mn - alpha}`` per case.
    """
    if not battery.cases or battery.points is None or len(battery) == 0:
        return _empty("welland", battery)
    records, wits = [], []
    theo = 0.0
    idx = 0
    for ci, pi in battery.instances():
        case = battery.cases[ci]
        cfg = case.cfg
        eps = welland_epsilon(cfg) if epsilon is None else float(epsilon)
        if not 0.0 < eps < min(cfg.alpha, cfg.mn - cfg.alpha):
            raise HypothesisViolation("0 < eps < min{alpha, mn - alpha}", f"eps={eps:g}")
        x = battery.points[pi]
        prof = battery.profile(ci, x)
        if (cfg.alpha + eps) not in prof.M:
            prof = point_profile(case.functions, case.kernel, cfg.alpha, x, battery.settings,
                                 (cfg.alpha + eps, cfg.alpha - eps))
        bound = math.sqrt(prof.M[cfg.alpha + eps]) * math.sqrt(prof.M[cfg.alpha - eps])
        c_proof = welland_constant(eps, cfg.mn, cfg.alpha)
        theo = max(theo, c_proof)
        lhs = abs(prof.I)
        rhs = c_proof * bound
        h = config_hash(case.describe())
        records.append(InstanceRecord(idx, h, lhs, rhs, _ratio(lhs, bound), bool(lhs <= rhs)))
        wits.append({"case": case.label, "x": x.tolist(), "config_hash": h, "epsilon": eps})
        idx += 1
    return _finish("welland", _battery_config(battery, epsilon=epsilon), records, wits, theo)


@_timed
def check_theorem33(battery, slack=10.0):
    """Unit-kernel maximal value below the unit-kernel integral of ``|f|``.

    Passes when ``M <= I(|f|) + slack * quad_tol`` at every point.
    """
    if not battery.cases or battery.points is None or len(battery) == 0:
        return _empty("theorem33", battery)
    tol = battery.settings.quad_tol
    records, wits = [], []
    idx = 0
    for ci, pi in battery.instances():
        case = battery.cases[ci]
        x = battery.points[pi]
        prof = battery.profile(ci, x, "smooth")
        lhs, rhs = prof.M[case.cfg.alpha], prof.I_abs
        h = config_hash(case.describe())
        records.append(InstanceRecord(idx, h, lhs, rhs, _ratio(lhs, rhs),
                                      bool(lhs <= rhs + slack * tol)))
        wits.append({"case": case.label, "x": x.tolist(), "config_hash": h})
        idx += 1
    return _finish("theorem33", _battery_config(battery), records, wits, 1.0)


@_timed
def check_scaling_homogeneity(battery, lam=2.0, rel_tol=1e-3):
    """Dilation identities for ``I`` and ``M`` at every battery point.

    ``I(f(lam .))(x) = lam^-alpha I(f)(lam x)`` to ``rel_tol``; the dilated
    maximal value must lie in the dyadic-slack band around
    ``lam^-alpha M(f)(lam x)``.
    """
    lam = float(lam)
    if not battery.cases or battery.points is None or len(battery) == 0:
        return _empty("scaling", battery)
    if lam <= 0 or math.log2(lam) != round(math.log2(lam)):
        raise HypothesisViolation("lambda a power of 2", f"lambda={lam}")
    records, wits = [], []
    idx = 0
    for ci, case in enumerate(battery.cases):
        cfg = case.cfg
        dil = tuple(f.dilate(lam) for f in case.functions)
        slack = battery.settings.slack(cfg.mn, cfg.alpha)
        for pi in range(len(battery.points)):
            x = battery.points[pi]
            a = cfg.alpha
            ref = battery.profile(ci, lam * x)
            got = point_profile(dil, case.kernel, a, x, battery.settings, (a,))
            want_i = lam ** (-a) * ref.I
            scale = max(abs(want_i), lam ** (-a) * ref.I_abs * 1e-9, 1e-300)
            err = abs(got.I - want_i) / scale if (got.I != 0.0 or want_i != 0.0) else 0.0
            want_m = lam ** (-a) * ref.M[a]
            m_ok = want_m / slack * (1 - 1e-9) <= got.M[a] <= want_m * slack * (1 + 1e-9)
            h = config_hash(case.describe())
            records.append(InstanceRecord(idx, h, got.I, want_i, err, bool(err < rel_tol and m_ok)))
            wits.append({"case": case.label, "x": x.tolist(), "config_hash": h,
                         "M": got.M[a], "M_ref": want_m})
            idx += 1
    return _finish("scaling", _battery_config(battery, lam=lam, rel_tol=rel_tol), records, wits, None)


# norm checks ----------------------------------------------------------------

def _boundary_cfg(cfg):
    """Same case with ``p_1 = s'`` (weak-type endpoint)."""
    return derive_exponents(cfg.m, cfg.n, cfg.alpha, cfg.s, (cfg.s_prime,) + tuple(cfg.p_in[1:]))


def _require(cond, hypothesis, detail=""):
    if not cond:
        raise HypothesisViolation(hypothesis, detail)


def _theorem_terms(theorem_id, case, setup):
    """Exponents, norms and weight hypotheses for a theorem on one case.

    Returns ``(op, p_out, weak, out_norm, in_norms)`` where the norm entries
    are callables on SampledFunctions.
    """
    cfg = case.cfg
    sp = cfg.s_prime
    n = cfg.n
    one = WeightSpec.constant(1.0, n)
    if theorem_id in ("T1ii", "T2ii", "T7"):
        cfg = _boundary_cfg(cfg)
    op = "M" if theorem_id in MAXIMAL_IDS else "I"
    if theorem_id in ("T1i", "T2i"):
        _require(all(sp < p for p in cfg.p_in), "s' < p_i for every i")
        p = cfg.p_out
        return op, False, (lambda g: lp_norm(g, p)), [(lambda g, pi=pi: lp_norm(g, pi)) for pi in cfg.p_in], cfg
    if theorem_id in ("T1ii", "T2ii"):
        p = cfg.p_out
        return op, True, (lambda g: weak_lp_quasinorm(g, p)), [(lambda g, pi=pi: lp_norm(g, pi)) for pi in cfg.p_in], cfg
    if theorem_id in ("T3", "T4"):
        w = setup.w or one
        _require(all(sp < p < cfg.mn / cfg.alpha for p in cfg.p_in), "s' < p_i < mn/alpha")
        W = w.pow(sp)
        for p_i, q_i in zip(cfg.p_in, cfg.q_per_factor):
            rep = apq_constant(W, p_i / sp, q_i / sp, setup.family)
            _require(rep.finite, "w^s' in A(p_i/s', q_i/s') for every i",
                     f"sup={rep.sup_estimate:g}, divergence={rep.divergence_flag}")
        p = cfg.p_out
        out = lambda g: weighted_norm(g, NormSpec("weighted_multiplier", p, w))
        ins = [(lambda g, pi=pi: weighted_norm(g, NormSpec("weighted_multiplier", pi, w))) for pi in cfg.p_in]
        return op, False, out, ins, cfg
    u = setup.u or one
    v = setup.v or one
    q = tuple(setup.q) if setup.q is not None else cfg.q_per_factor
    r = tuple(setup.r) if setup.r is not None else (2.0,) * cfg.m
    ins = [(lambda g, pi=pi: weighted_norm(g, NormSpec("weighted_measure", pi, v))) for pi in cfg.p_in]
    if theorem_id == "T5":
        _require(all(sp < p_i < q_i < math.inf for p_i, q_i in zip(cfg.p_in, q)), "s' < p_i < q_i < inf")
        for p_i, q_i, r_i in zip(cfg.p_in, q, r):
            rep = cond7_constant(u, v, p_i, q_i, r_i, cfg.alpha, sp, cfg.m, setup.family)
            _require(rep.finite, "bumped two-weight condition for every i",
                     f"sup={rep.sup_estimate:g}, divergence={rep.divergence_flag}")
        p = 1.0 / sum(1.0 / qi for qi in q)
        return op, False, (lambda g: weighted_norm(g, NormSpec("weighted_measure", p, u))), ins, cfg
    if theorem_id == "T6":
        _require(setup.p is not None, "explicit output exponent p", "supply p or 'balanced'")
        if setup.p == "balanced":
            # zero |Q| exponent: 1/(mp) = 1/p_i - alpha/(mn), needs equal p_i
            _require(len(set(cfg.p_in)) == 1, "balanced p needs equal p_i")
            p = cfg.q_per_factor[0] / cfg.m
        else:
            p = float(setup.p)
        _require(all(sp < p_i < cfg.m * p < math.inf for p_i in cfg.p_in), "s' < p_i < mp < inf")
        for p_i, r_i in zip(cfg.p_in, r):
            rep = thm6_condition_constant(u, v, p_i, p, r_i, cfg.alpha, sp, cfg.m, setup.family)
            _require(rep.finite, "bumped-u two-weight condition for every i",
                     f"sup={rep.sup_estimate:g}, divergence={rep.divergence_flag}")
        return op, False, (lambda g: weighted_norm(g, NormSpec("weighted_measure", p, u))), ins, cfg
    if theorem_id == "T7":
        _require(all(sp <= p_i <= q_i < math.inf for p_i, q_i in zip(cfg.p_in, q)), "s' <= p_i <= q_i < inf")
        for p_i, q_i in zip(cfg.p_in, q):
            rep = pair_alpha_constant(u, v, p_i / sp, q_i / sp, cfg.alpha * sp / cfg.m, setup.family)
            _require(rep.finite, "(u, v) in A_{p_i/s', q_i/s'}^{alpha s'/m} for every i",
                     f"sup={rep.sup_estimate:g}, divergence={rep.divergence_flag}")
        p = 1.0 / sum(1.0 / qi for qi in q)
        return op, True, (lambda g: weighted_weak_quasinorm(g, p, u)), ins, cfg
    raise ValueError(f"unknown theorem id {theorem_id!r}")


def _norm_check(theorem_id, battery, setup=None, baseline=None):
    if not battery.cases or battery.settings.x_shape is None:
        return _empty(theorem_id, battery)
    setup = setup or WeightSetup()
    records, wits = [], []
    for ci, case in enumerate(battery.cases):
        op, weak, out_norm, in_norms, cfg = _theorem_terms(theorem_id, case, setup)
        fld = battery.field(ci, op)
        fs = case.functions
        lhs = out_norm(fld)
        rhs = float(np.prod([nrm(f) for nrm, f in zip(in_norms, fs)]))
        c = _ratio(lhs, rhs)
        h = config_hash(case.describe())
        records.append(InstanceRecord(ci, h, lhs, rhs, c, bool(math.isfinite(c))))
        wits.append({"case": case.label, "config_hash": h, "p_out": cfg.p_out})
    ok = True
    notes = ["constants are sups over the battery on the x grid"]
    if baseline is not None:
        emp = max(r.constant for r in records)
        ok = emp <= 1.05 * float(baseline)
        notes.append(f"baseline {float(baseline)!r}")
    cfg_d = _battery_config(battery, theorem=theorem_id, weights=setup.describe())
    return _finish(theorem_id, cfg_d, records, wits, None, extra_pass=ok, notes=notes)


@_timed
def check_strong_type(theorem_id, battery, setup=None, baseline=None):
    """Output norm over the product of input norms, per battery case.

    ``theorem_id`` selects the operator and norm convention: ``T1i`` and
    ``T2i`` unweighted, ``T3``/``T4`` one-weight multiplier norms, ``T5``
    and ``T6`` two-weight measure norms. Weight-class hypotheses are
    checked on ``setup.family`` first. Passes when every ratio is finite
    and the sup stays within 5% of ``baseline`` if one is given.
    """
    if theorem_id not in STRONG_IDS:
        raise ValueError(f"theorem_id must be one of {STRONG_IDS}")
    return _norm_check(theorem_id, battery, setup, baseline)


@_timed
def check_weak_type(theorem_id, battery, setup=None, baseline=None):
    """Weak quasinorm version of :func:`check_strong_type`.

    Uses the endpoint exponents ``p_1 = s'``; ``T7`` uses the ``u``-weighted
    weak quasinorm and ``v``-weighted inputs.
    """
    if theorem_id not in WEAK_IDS:
        raise ValueError(f"theorem_id must be one of {WEAK_IDS}")
    return _norm_check(theorem_id, battery, setup, baseline)


def _at_order(battery, ci, order, p_out):
    """``sup`` ratio of the maximal field at ``order`` in ``L^p_out``."""
    case = battery.cases[ci]
    fld = battery.field(ci, "M", order)
    lhs = lp_norm(fld, p_out)
    rhs = float(np.prod([lp_norm(f, p) for f, p in zip(case.functions, case.cfg.p_in)]))
    return _ratio(lhs, rhs)


@_timed
def check_lemma_to_theorem(battery, epsilon=None, slack=1e-6):
    """Fractional-integral constant against the maximal constants at ``alpha +- eps``.

    With ``K_+``/``K_-`` the unweighted maximal constants at orders
    ``alpha +- eps`` (targets ``1/q = 1/p -+ eps/n``), passes when the
    integral constant is at most ``C_proof sqrt(K_+ K_-) + slack``.
    """
    if not battery.cases:
        return _empty("lemma_to_theorem", battery)
    t2 = check_strong_type.__wrapped__("T2i", battery)
    k_plus = k_minus = 0.0
    c_proof = 0.0
    for ci, case in enumerate(battery.cases):
        pe = proof_exponents(case.cfg, epsilon)
        eps = pe.epsilon
        if (case.cfg.alpha + eps) not in battery.orders(case):
            raise HypothesisViolation("epsilon matches the battery orders", f"eps={eps:g}")
        k_plus = max(k_plus, _at_order(battery, ci, case.cfg.alpha + eps, pe.q1_eps))
        k_minus = max(k_minus, _at_order(battery, ci, case.cfg.alpha - eps, pe.q2_eps))
        c_proof = max(c_proof, welland_constant(eps, case.cfg.mn, case.cfg.alpha))
    bound = c_proof * math.sqrt(k_plus * k_minus) + slack
    emp = t2.empirical_constant
    rep = VerificationReport(
        "lemma_to_theorem", _battery_config(battery, epsilon=epsilon), emp, bound, emp <= bound,
        [{"K_plus": k_plus, "K_minus": k_minus, "C_proof": c_proof}],
        instances=[InstanceRecord(0, config_hash(_battery_config(battery)), emp, bound,
                                  _ratio(emp, bound - slack), emp <= bound)],
    )
    return rep


@_timed
def check_collapse_chain(battery, tol=1e-12):
    """Unit weights reproduce the unweighted constants.

    Compares the one-weight maximal check with ``w = 1`` and the bumped
    two-weight check with ``u = v = 1`` and balanced targets against the
    unweighted strong constant, and the two-weight weak check with unit
    weights against the unweighted weak constant.
    """
    unit = WeightSetup()
    t1i = check_strong_type.__wrapped__("T1i", battery).empirical_constant
    t1ii = check_weak_type.__wrapped__("T1ii", battery).empirical_constant
    t3 = check_strong_type.__wrapped__("T3", battery, unit).empirical_constant
    t5 = check_strong_type.__wrapped__("T5", battery, unit).empirical_constant
    t7 = check_weak_type.__wrapped__("T7", battery, unit).empirical_constant
    pairs = [("T3", t3, t1i), ("T5", t5, t1i), ("T7", t7, t1ii)]
    records = []
    worst = 0.0
    for i, (name, a, b) in enumerate(pairs):
        d = abs(a - b) / max(abs(b), 1e-300)
        worst = max(worst, d)
        records.append(InstanceRecord(i, name, a, b, d, d <= tol))
    return VerificationReport("collapse", _battery_config(battery, tol=tol), worst, tol,
                              all(r.passed for r in records),
                              [{"pairs": [[n, a, b] for n, a, b in pairs]}], instances=records)


@_timed
def check_remark2(pairs, fam, quad_tol=1e-3):
    """Bumped condition finite implies pair-class functional finite.

    ``pairs`` is a list of ``(u, v, params)``; pairs whose bumped condition
    diverges are skipped and counted in the notes.
    """
    records, wits = [], []
    skipped = 0
    for i, (u, v, params) in enumerate(pairs):
        res = remark2_implication_check(u, v, params, fam, quad_tol)
        if res.skipped:
            skipped += 1
            continue
        h = config_hash({"u": u.describe(), "v": v.describe(), "params": params})
        records.append(InstanceRecord(i, h, res.pair.sup_estimate, res.cond7.sup_estimate,
                                      res.margin, bool(res.holds)))
        wits.append({"config_hash": h, "params": params})
    return _finish("remark2", {"pairs": len(pairs), "skipped": skipped}, records, wits, 1.0,
                   notes=[f"{skipped} pairs skipped: bumped condition diverges"])


# batteries ------------------------------------------------------------------

def _mid_exponent(s_prime, m, n, alpha):
    """An input exponent strictly inside ``(s', mn/alpha)``."""
    hi = m * n / alpha
    return 0.5 * (s_prime + hi) if math.isfinite(hi) else 2.0 * s_prime


def build_battery(seed=0, m_values=(1, 2), n=1, cases_per_m=3, kernels=("rough", "unit"),
                  generators=("chi", "tent"), alphas=None, points=None, x_range=(-3.0, 3.0),
                  x_cells=16, cells=16, settings=None, name="battery"):
    """Seeded battery of indicators and tents on random subintervals of [-1, 1].

    ``kernels`` cycles through ``rough`` (``|theta_1|^(-1/4)`` with ``s = 2``)
    and ``unit`` (``Omega = 1``, ``s = inf``). ``points`` is an int (random
    points in ``x_range``) or ``None`` for the field grid centers.
    """
    if n != 1:
        raise ConfigError("builtin batteries are one-dimensional")
    rng = np.random.default_rng(seed)
    settings = settings or EvalSettings()
    lo, hi = x_range
    settings = settings.with_grid([lo], (hi - lo) / x_cells, [x_cells])
    cases = []
    for m in m_values:
        for c in range(cases_per_m):
            kind = kernels[(c + m) % len(kernels)]
            if kind == "rough":
                kern, s = KernelSpec.first_coordinate_power(0.25, m, n, s=2.0), 2.0
            else:
                kern, s = KernelSpec.constant(1.0, m, n), math.inf
            sp = 1.0 if math.isinf(s) else s / (s - 1.0)
            if alphas is None:
                top = m * n / sp
                alpha = float(np.round(rng.uniform(0.3, 0.7) * top, 3))
            else:
                alpha = float(alphas[c % len(alphas)])
            p = _mid_exponent(sp, m, n, alpha)
            cfg = derive_exponents(m, n, alpha, s, [p] * m)
            fs = []
            for i in range(m):
                g = generators[int(rng.integers(len(generators)))]
                a = float(np.round(rng.uniform(-1.0, 0.0), 3))
                b = float(np.round(rng.uniform(0.25, 1.0), 3))
                if g == "chi":
                    fs.append(indicator(a, b, n, cells))
                elif g == "tent":
                    fs.append(tent(a, b, n, cells))
                elif g == "randpc":
                    fs.append(random_piecewise(cells, int(rng.integers(2**31)), n))
                else:
                    raise ConfigError(f"unknown generator {g!r}")
            label = f"m{m}-c{c}-{kind}-a{alpha:g}"
            cases.append(BatteryCase(cfg, kern, tuple(fs), label))
    pts = None
    if points is not None:
        pts = np.round(rng.uniform(lo, hi, size=(int(points), n)), 6)
    return TestBattery(cases, settings, pts, name)


def paper_core_battery(seed=7, settings=None):
    """Battery shared by the core suite: three cases each for m = 1, 2."""
    return build_battery(seed, (1, 2), 1, 3, settings=settings, name=f"paper-core-{seed}")


def lemma_battery(seed=0, cases=40, points_per_case=5, settings=None):
    """Rough-kernel pointwise battery of ``cases * points_per_case`` instances.

    Every fourth case uses the unit kernel with ``s = inf`` (``s' = 1``).
    """
    half = cases // 2
    b = build_battery(seed, (1, 2), 1, half, kernels=("rough", "rough", "rough", "unit"),
                      points=points_per_case, x_range=(-1.5, 1.5), settings=settings,
                      name=f"lemma-{seed}")
    return b


# suites ---------------------------------------------------------------------

PAPER_CORE = ("lemma1", "welland", "T1i", "T1ii", "T2i", "T2ii", "scaling")
FULL = PAPER_CORE + ("theorem33", "T3", "T4", "T5", "T6", "T7", "collapse", "lemma_to_theorem",
                     "remark2")
SUITES = {"paper-core": PAPER_CORE, "full": FULL}
_CHECK_KEYS = {"id", "epsilon", "lambda", "baseline", "weights"}
_SUITE_KEYS = {"schema", "suite", "seed", "checks", "battery", "settings", "baselines"}
_BATTERY_KEYS = {"m_values", "cases_per_m", "kernels", "generators", "alphas", "x_range",
                 "x_cells", "cells", "points"}
_SETTINGS_KEYS = {"quad_tol", "rho", "depth", "rule", "k0", "max_levels", "budget"}


def _default_setup(check_id):
    fam = CubeFamily.interval(-4.0, 4.0, level_max=7)
    if check_id in ("T3", "T4"):
        return WeightSetup(w=WeightSpec.power(0.1), family=fam)
    if check_id in ("T5", "T6", "T7"):
        # bounded on the root cube; equal powers cannot balance near and away from 0 at once
        return WeightSetup(u=WeightSpec.power(0.2), v=WeightSpec.constant(1.0), p="balanced",
                           family=fam)
    return WeightSetup(family=fam)


def _remark2_pairs(seed, count=10):
    """Seeded power-weight pairs with targets balanced for the pair's powers."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        beta = float(np.round(rng.uniform(0.0, 0.4), 3))
        alpha = float(np.round(rng.uniform(0.2, 0.8), 3))
        p_i = float(np.round(rng.uniform(1.5, 3.0), 3))
        inv_q = 1.0 / p_i - alpha / (2.0 * (1.0 + beta))
        params = {"p_i": p_i, "q_i": 1.0 / inv_q, "r_i": 2.0, "alpha": alpha, "s_prime": 1.0, "m": 2}
        out.append((WeightSpec.power(beta), WeightSpec.power(beta), params))
    return out


def _parse_weights(spec):
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError("weights must be an object")
    allowed = {"w", "u", "v", "q", "r", "p"}
    bad = set(spec) - allowed
    if bad:
        raise ConfigError(f"unknown weights keys {sorted(bad)}")
    kw = {}
    for k in ("w", "u", "v"):
        if k in spec:
            kw[k] = WeightSpec.parse(spec[k], 1)
    for k in ("q", "r"):
        if k in spec:
            kw[k] = tuple(float(v) for v in spec[k])
    if "p" in spec:
        kw["p"] = spec["p"] if spec["p"] == "balanced" else float(spec["p"])
    return WeightSetup(**kw)


def normalize_suite_config(config):
    """Validate a suite config dict and fill defaults; raises ConfigError."""
    if not isinstance(config, dict):
        raise ConfigError("suite config must be a JSON object")
    bad = set(config) - _SUITE_KEYS
    if bad:
        raise ConfigError(f"unknown suite config keys {sorted(bad)}")
    schema = config.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"schema must be {SCHEMA!r}, got {schema!r}")
    suite = config.get("suite")
    checks = config.get("checks")
    if checks is None:
        if suite is None:
            checks = []
        elif suite in SUITES:
            checks = [{"id": c} for c in SUITES[suite]]
        else:
            raise ConfigError(f"unknown suite {suite!r}; known: {sorted(SUITES)}")
    norm_checks = []
    for i, c in enumerate(checks):
        if isinstance(c, str):
            c = {"id": c}
        if not isinstance(c, dict) or "id" not in c:
            raise ConfigError(f"checks[{i}]: expected an object with an 'id'")
        bad = set(c) - _CHECK_KEYS
        if bad:
            raise ConfigError(f"checks[{i}]: unknown keys {sorted(bad)}")
        if c["id"] not in FULL:
            raise ConfigError(f"checks[{i}]: unknown check id {c['id']!r}")
        norm_checks.append(dict(c))
    battery = dict(config.get("battery") or {})
    bad = set(battery) - _BATTERY_KEYS
    if bad:
        raise ConfigError(f"battery: unknown keys {sorted(bad)}")
    settings = dict(config.get("settings") or {})
    bad = set(settings) - _SETTINGS_KEYS
    if bad:
        raise ConfigError(f"settings: unknown keys {sorted(bad)}")
    return {
        "schema": SCHEMA,
        "suite": suite,
        "seed": int(config.get("seed", 7)),
        "checks": norm_checks,
        "battery": battery,
        "settings": settings,
        "baselines": dict(config.get("baselines") or {}),
    }


def run_suite(config):
    """Run the checks of a suite config (dict or path to a JSON file).

    Returns ``(reports, summary)``. A hypothesis violation fails only its
    own check; the remaining checks still run.
    """
    if isinstance(config, (str, bytes)) or hasattr(config, "__fspath__"):
        try:
            with open(config) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config}: line {exc.lineno}: {exc.msg}") from exc
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        raw = config
    cfg = normalize_suite_config(raw)
    seed = cfg["seed"]
    try:
        settings = EvalSettings(**cfg["settings"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"settings: {exc}") from exc
    battery = None
    if cfg["checks"]:
        try:
            bkw = dict(cfg["battery"])
            if "x_range" in bkw:
                bkw["x_range"] = tuple(bkw["x_range"])
            battery = build_battery(seed, settings=settings, name=f"{cfg['suite'] or 'custom'}-{seed}", **bkw)
        except (TypeError, ValueError, HypothesisViolation) as exc:
            raise ConfigError(f"battery: {exc}") from exc
    reports = []
    for c in cfg["checks"]:
        cid = c["id"]
        baseline = c.get("baseline", cfg["baselines"].get(cid))
        try:
            rep = _dispatch(cid, c, battery, seed, baseline)
        except HypothesisViolation as exc:
            rep = VerificationReport(cid, {"battery": battery.name}, math.nan, None, False,
                                     notes=[str(exc)], status="hypothesis_violation")
        except RoughFracError as exc:
            rep = VerificationReport(cid, {"battery": battery.name}, math.nan, None, False,
                                     notes=[f"{type(exc).__name__}: {exc}"], status="error")
        reports.append(rep)
    summary = {
        "suite": cfg["suite"] or "custom",
        "seed": seed,
        "passed": all(r.passed for r in reports),
        "hypothesis_violations": sum(r.status == "hypothesis_violation" for r in reports),
        "config": cfg,
    }
    return reports, summary


def _dispatch(cid, c, battery, seed, baseline):
    setup = _parse_weights(c.get("weights")) or _default_setup(cid)
    if cid == "lemma1":
        return check_pointwise_lemma1(battery)
    if cid == "welland":
        return check_welland(battery, c.get("epsilon"))
    if cid == "theorem33":
        return check_theorem33(battery)
    if cid == "scaling":
        return check_scaling_homogeneity(battery, c.get("lambda", 2.0))
    if cid in STRONG_IDS:
        return check_strong_type(cid, battery, setup, baseline)
    if cid in WEAK_IDS:
        return check_weak_type(cid, battery, setup, baseline)
    if cid == "collapse":
        return check_collapse_chain(battery)
    if cid == "lemma_to_theorem":
        return check_lemma_to_theorem(battery, c.get("epsilon"))
    if cid == "remark2":
        return check_remark2(_remark2_pairs(seed), CubeFamily.interval(-1.0, 1.0, level_max=6))
    raise ConfigError(f"unknown check id {cid!r}")


# serialization ----------------------------------------------------------------

CSV_COLUMNS = ("check_id", "config_hash", "instance_index", "lhs", "rhs", "constant", "passed")


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for r in rep.instances:
            w.writerow([rep.check_id, r.config_hash, r.instance_index, repr(float(r.lhs)),
                        repr(float(r.rhs)), repr(float(r.constant)), str(bool(r.passed)).lower()])
    return buf.getvalue()


def reports_to_json(reports, suite, seed, effective_config=None):
    doc = {
        "suite": suite,
        "seed": seed,
        "checks": [r.summary() for r in reports],
    }
    if effective_config is not None:
        doc["config"] = effective_config
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


def write_csv(reports, path):
    with open(path, "w", newline="") as fh:
        fh.write(reports_to_csv(reports))


def write_json(reports, path, suite, seed, effective_config=None):
    with open(path, "w") as fh:
        fh.write(reports_to_json(reports, suite, seed, effective_config))
