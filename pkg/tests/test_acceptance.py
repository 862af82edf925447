"""The twelve acceptance criteria; each prints one PASS/FAIL line."""

import filecmp
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from roughfrac.exponents import derive_exponents
from roughfrac.functions import indicator
from roughfrac.kernels import KernelSpec
from roughfrac.operators import EvalSettings, eval_I, eval_M, welland_constant
from roughfrac.verify import (
    build_battery,
    check_collapse_chain,
    check_lemma_to_theorem,
    check_pointwise_lemma1,
    check_scaling_homogeneity,
    check_theorem33,
    check_welland,
    lemma_battery,
    paper_core_battery,
)
from roughfrac.weights import (
    CubeFamily,
    WeightSpec,
    ap_constant,
    apq_constant,
    cond7_constant,
    pair_alpha_constant,
)

UNIT = KernelSpec.constant(1.0, 1, 1)
CFG = derive_exponents(1, 1, 0.5, math.inf, [1.5])
CHI = (indicator(-1, 1, cells=32),)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def lemma200():
    b = lemma_battery(seed=0, cases=40, points_per_case=5)
    assert len(b) == 200
    return b


@pytest.fixture(scope="module")
def core():
    return paper_core_battery(7)


def test_criterion_01_riesz_potential(verdict):
    t0 = time.perf_counter()
    val = eval_I(CHI, UNIT, CFG, [0.0], EvalSettings(quad_tol=1e-3))
    dt = time.perf_counter() - t0
    verdict(1, abs(val - 4.0) <= 0.04 and dt < 1.0, f"I(0)={val!r} (oracle 4.0) in {dt:.3f}s")


def test_criterion_02_maximal_value(verdict):
    s4 = EvalSettings(rho=4)
    m4 = eval_M(CHI, UNIT, CFG, [0.0], s4)
    m16 = eval_M(CHI, UNIT, CFG, [0.0], EvalSettings(rho=16))
    hi = 2.0 * s4.slack(1, 0.5)
    ok = 2.0 * 0.98 <= m4 <= hi and abs(m16 - 2.0) <= 0.04
    verdict(2, ok, f"M(0)={m4!r} in [1.96, {hi:.4f}] at rho=4; {m16!r} at rho=16")


def test_criterion_03_lemma1_suite(verdict, lemma200):
    t0 = time.perf_counter()
    rep = check_pointwise_lemma1(lemma200)
    dt = time.perf_counter() - t0
    n_ok = sum(r.passed for r in rep.instances)
    kernels_ok = all(c.cfg.m in (1, 2) and c.cfg.n == 1 for c in lemma200.cases)
    ok = (rep.passed and n_ok == 200 and math.isfinite(rep.empirical_constant)
          and rep.collapse_constant <= 1 + 1e-6 and dt < 120 and kernels_ok)
    verdict(3, ok, f"{n_ok}/200 points, C_emp={rep.empirical_constant:.4f}, "
                   f"unit s'=1 C_emp={rep.collapse_constant!r}, {dt:.1f}s")


def test_criterion_04_welland_suite(verdict, lemma200):
    rep = check_welland(lemma200)
    n_ok = sum(r.passed for r in rep.instances)
    formula_ok = all(
        math.isclose(welland_constant(0.5 * min(c.cfg.alpha, c.cfg.mn - c.cfg.alpha), c.cfg.mn, c.cfg.alpha),
                     2 * 2 ** (c.cfg.mn - c.cfg.alpha) / (1 - 2 ** (-0.5 * min(c.cfg.alpha, c.cfg.mn - c.cfg.alpha))))
        for c in lemma200.cases
    )
    verdict(4, rep.passed and n_ok == len(rep.instances) == 200 and formula_ok,
            f"{n_ok}/200 points, worst |I|/bound={rep.empirical_constant:.4f} <= C_proof")


def test_criterion_05_reduction(verdict, lemma200):
    rep = check_theorem33(lemma200)
    tol = lemma200.settings.quad_tol
    worst = max(r.lhs - r.rhs for r in rep.instances)
    verdict(5, rep.passed and worst <= 10 * tol,
            f"max(M_smooth - I_smooth(|f|))={worst:.3e} <= {10 * tol:g} on 200 points")


def test_criterion_06_dilation(verdict):
    b = build_battery(seed=6, m_values=(1, 2), cases_per_m=5, points=5)
    assert len(b) == 50
    errs = []
    ok = True
    for lam in (2.0, 4.0):
        rep = check_scaling_homogeneity(b, lam)
        errs.append(max(r.constant for r in rep.instances))
        ok = ok and all(r.constant < 1e-3 for r in rep.instances) and len(rep.instances) == 50
    verdict(6, ok, f"max relative error {errs[0]:.2e} (lambda=2), {errs[1]:.2e} (lambda=4) on 50 instances")


def test_criterion_07_weight_windows(verdict):
    fam = CubeFamily.interval(-1, 1, level_max=8)
    betas = (-1.5, -0.5, 0.0, 0.5, 1.5)
    flags = tuple(ap_constant(WeightSpec.power(b), 2.0, fam).divergence_flag for b in betas)
    one = WeightSpec.constant(1.0)
    ap1 = ap_constant(one, 2.0, fam).sup_estimate
    apq1 = apq_constant(one, 2.0, 4.0, fam).sup_estimate
    ok = flags == (True, False, False, False, True) and abs(ap1 - 1) <= 1e-9 and abs(apq1 - 1) <= 1e-9
    verdict(7, ok, f"flags={flags}, unit ap={ap1!r}, apq={apq1!r}")


def test_criterion_08_zero_order_pair_consistency(verdict):
    fam = CubeFamily.interval(-1, 1, level_max=6)
    rng = np.random.default_rng(8)
    worst = 0.0
    worst_root = 0.0
    for _ in range(20):
        u = WeightSpec.power(float(rng.uniform(-0.5, 0.5)))
        p = float(rng.uniform(1.5, 4.0))
        ap = ap_constant(u, p, fam).cube_values
        pair = pair_alpha_constant(u, u, p, p, 0.0, fam).cube_values
        worst = max(worst, float(np.max(np.abs(pair - ap) / ap)))
        worst_root = max(worst_root, float(np.max(np.abs(pair**p - ap) / ap)))
    verdict(8, worst <= 1e-10,
            f"max per-cube |pair - ap|/ap={worst:.3e} (pair^p vs ap: {worst_root:.1e})")


def test_criterion_09_remark2(verdict):
    fam = CubeFamily.interval(-1, 1, level_max=6)
    rng = np.random.default_rng(9)
    accepted, tried, failures = 0, 0, []
    while accepted < 50:
        tried += 1
        assert tried < 500
        beta = float(rng.uniform(0.0, 0.5))
        alpha = float(rng.uniform(0.2, 0.9))
        s_prime = float(rng.choice([1.0, 1.25, 1.5]))
        p_i = float(rng.uniform(s_prime + 0.25, 3.5))
        inv_q = 1.0 / p_i - alpha / (2.0 * (1.0 + beta)) + float(rng.choice([0.0, 0.0, 0.05]))
        if not 0 < inv_q < 1.0 / p_i:
            continue
        q_i = 1.0 / inv_q
        u = v = WeightSpec.power(beta)
        c7 = cond7_constant(u, v, p_i, q_i, 2.0, alpha, s_prime, 2, fam)
        if not c7.finite:
            continue
        accepted += 1
        pr = pair_alpha_constant(u, v, p_i / s_prime, q_i / s_prime, alpha * s_prime / 2, fam)
        if not pr.finite:
            failures.append((beta, alpha, s_prime, p_i, q_i))
    verdict(9, not failures, f"{50 - len(failures)}/50 finite pair constants ({tried} pairs drawn)")


def test_criterion_10_collapse_chain(verdict, core):
    rep = check_collapse_chain(core)
    verdict(10, rep.passed, f"max relative gap {rep.empirical_constant:.1e} over T3/T5/T7")


def test_criterion_11_lemma_to_theorem(verdict, core):
    rep = check_lemma_to_theorem(core)
    verdict(11, rep.passed, f"T2i constant {rep.empirical_constant:.4f} <= {rep.theoretical_constant:.4f}")


def test_criterion_12_determinism(verdict, tmp_path):
    runs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        res = subprocess.run(
            [sys.executable, "-m", "roughfrac.cli", "verify", "--suite", "paper-core", "--seed", "7",
             "--out", "report.json"],
            cwd=d, capture_output=True, text=True,
        )
        runs.append((res.returncode, d))
    (rc_a, a), (rc_b, b) = runs
    same = all(filecmp.cmp(a / f, b / f, shallow=False) for f in ("report.json", "report.csv"))
    verdict(12, rc_a == rc_b == 0 and same, f"exit codes {rc_a}/{rc_b}, JSON and CSV byte-identical: {same}")
