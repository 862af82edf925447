import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughfrac.exceptions import HypothesisViolation, NoFeasibleEpsilon, NonIntegrableOnCube
from roughfrac.functions import SampledFunction
from roughfrac.weights import (
    CubeFamily,
    WeightSpec,
    ap_constant,
    apq_constant,
    cond7_constant,
    divergence_trend,
    pair_alpha_constant,
    perturb_epsilon_search,
    remark2_implication_check,
    thm6_condition_constant,
)

# frozen dyadic sweeps with closed-form power averages on [-1,1], levels 0..8
COND7_SWEEP = 1.0837986317527992   # u=v=|x|^0.2, m=2, s'=1, r=2, alpha=0.5, p=3, q=8
THM6_SWEEP = 1.1097159656372055    # same pair, p_i=3, p=3, r=2

FAM = CubeFamily.interval(-1, 1, level_max=8)
ONE = WeightSpec.constant(1.0)


def test_unit_weight_constants():
    assert ap_constant(ONE, 2.0, FAM).sup_estimate == pytest.approx(1.0, abs=1e-9)
    assert ap_constant(ONE, 3.5, FAM).sup_estimate == pytest.approx(1.0, abs=1e-9)
    assert apq_constant(ONE, 2.0, 4.0, FAM).sup_estimate == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("beta,flag", [(-0.9, False), (0.5, False), (0.9, False), (1.5, True)])
def test_ap_power_window(beta, flag):
    rep = ap_constant(WeightSpec.power(beta), 2.0, FAM)
    assert rep.divergence_flag is flag
    if flag:
        assert rep.direction == "fine"


def test_apq_examples():
    assert apq_constant(WeightSpec.power(0.1), 2.0, 4.0, FAM).finite
    assert apq_constant(WeightSpec.power(-0.3), 2.0, 4.0, FAM).divergence_flag


def test_pair_examples():
    assert pair_alpha_constant(ONE, ONE, 2.0, 2.0, 0.0, FAM).sup_estimate == pytest.approx(1.0)
    # 1/q + alpha/n - 1/p = 0
    rep = pair_alpha_constant(ONE, ONE, 2.0, 4.0, 0.25, FAM)
    np.testing.assert_allclose(rep.per_level_sup, 1.0)
    # exponent 0.1: sup shrinks like |Q|^0.1, so it grows toward coarse cubes
    rep = pair_alpha_constant(ONE, ONE, 2.0, 2.0, 0.1, FAM)
    assert rep.divergence_flag and rep.direction == "coarse"
    ratios = np.array(rep.per_level_sup[:-1]) / np.array(rep.per_level_sup[1:])
    np.testing.assert_allclose(ratios, 2**0.1)


def test_cond7_examples():
    rep = cond7_constant(ONE, ONE, 3.0, 12.0, 2.0, 0.5, 1.0, 2, FAM)
    assert rep.sup_estimate == pytest.approx(1.0)
    assert cond7_constant(ONE, ONE, 3.0, 4.0, 2.0, 0.5, 1.0, 2, FAM).divergence_flag
    u = WeightSpec.power(0.2)
    rep = cond7_constant(u, u, 3.0, 8.0, 2.0, 0.5, 1.0, 2, FAM)
    assert rep.finite
    assert rep.sup_estimate == pytest.approx(COND7_SWEEP, rel=0.02)


def test_thm6_examples():
    assert thm6_condition_constant(ONE, ONE, 3.0, 6.0, 2.0, 0.5, 1.0, 2, FAM).sup_estimate == pytest.approx(1.0)
    assert thm6_condition_constant(ONE, ONE, 3.0, 2.0, 2.0, 0.5, 1.0, 2, FAM).divergence_flag
    u = WeightSpec.power(0.2)
    rep = thm6_condition_constant(u, u, 3.0, 3.0, 2.0, 0.5, 1.0, 2, FAM)
    assert rep.sup_estimate == pytest.approx(THM6_SWEEP, rel=0.02)


def test_remark2_examples():
    params = dict(p_i=3.0, q_i=12.0, r_i=2.0, alpha=0.5, s_prime=1.0, m=2)
    holds, margin = remark2_implication_check(ONE, ONE, params, FAM)
    assert holds and margin == pytest.approx(1.0, abs=1e-6)
    bad = dict(params, q_i=4.0)
    res = remark2_implication_check(ONE, ONE, bad, FAM)
    assert res.skipped and res.holds is None and "precondition" in res.reason


def test_perturb_epsilon_search():
    grid = [0.05, 0.1, 0.15, 0.2]
    best, reports = perturb_epsilon_search(ONE, 2.0, 4.0, 0.25, 1.0, FAM, grid)
    assert best == 0.2 and all(ok for *_, ok in reports)
    best, _ = perturb_epsilon_search(WeightSpec.power(0.1), 2.0, 4.0, 0.25, 1.0, FAM, grid)
    assert best > 0


def test_perturb_window_edge_flagged():
    # w^q at the integrability edge: every perturbation toward larger q diverges
    w = WeightSpec.power(-0.24)
    with pytest.raises((NoFeasibleEpsilon, HypothesisViolation)):
        perturb_epsilon_search(w, 2.0, 4.0, 0.25, 1.0, FAM, [0.1, 0.2])


def test_positivity_validation():
    with pytest.raises(HypothesisViolation, match="w > 0"):
        WeightSpec.constant(0.0)
    zeroed = SampledFunction(1, (0.0,), 0.5, (2,), np.array([1.0, 0.0]))
    with pytest.raises(HypothesisViolation, match="w > 0"):
        WeightSpec.piecewise(zeroed)


def test_singular_average_at_origin_closed_form():
    # avg over [0, l] of |x|^c is l^c / (c + 1); ap at p=2 multiplies the w and w^-1 averages
    c = -0.96
    rep = ap_constant(WeightSpec.power(c), 2.0, CubeFamily.interval(-1, 1, level_max=5))
    for cube, val in zip(rep.cubes, rep.cube_values):
        if cube.lower[0] == 0.0:
            assert val == pytest.approx(1.0 / ((c + 1.0) * (1.0 - c)), rel=1e-5)
    # exact self-similarity: no spurious trend across levels
    assert np.ptp(rep.per_level_sup[1:]) < 1e-6 * rep.per_level_sup[1]


def test_strict_mode_raises_on_unstable_cube():
    with pytest.raises(NonIntegrableOnCube):
        ap_constant(WeightSpec.power(-0.9), 2.0, FAM, quad_tol=1e-6, strict=True)


def test_divergence_trend():
    assert divergence_trend([1, 1, 1, 1, 1]) == (False, None)
    assert divergence_trend([1, 1.1, 1.21, 1.331, 1.4641])[0]
    assert divergence_trend([1.4641, 1.331, 1.21, 1.1, 1])[1] == "coarse"
    # saturating growth is not divergence
    assert not divergence_trend([1.0, 1.2, 1.25, 1.26, 1.261])[0]


def test_random_cubes_deterministic():
    fam = CubeFamily.interval(-1, 1, level_max=4, random_count=10, seed=3)
    assert fam.random_cubes() == fam.random_cubes()
    rep = ap_constant(WeightSpec.power(0.3), 2.0, fam)
    assert len(rep.cubes) == 31 + 10


def test_zero_order_pair_is_ap_root():
    # per cube, pair(u, u, p, p, 0) is the 1/p-th power of the A_p functional
    rng = np.random.default_rng(11)
    for _ in range(5):
        u = WeightSpec.power(float(rng.uniform(-0.5, 0.5)))
        p = float(rng.uniform(1.5, 4))
        a = ap_constant(u, p, FAM).cube_values
        b = pair_alpha_constant(u, u, p, p, 0.0, FAM).cube_values
        np.testing.assert_allclose(b**p, a, rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(1e-3, 1e3), st.floats(1.5, 4.0))
def test_scaling_invariance(beta, c, p):
    w = WeightSpec.power(beta)
    fam = CubeFamily.interval(-1, 1, level_max=4)
    a = ap_constant(w, p, fam).cube_values
    b = ap_constant(w.scaled(c), p, fam).cube_values
    np.testing.assert_allclose(a, b, rtol=1e-10)
    a = apq_constant(w, p, 2 * p, fam).cube_values
    b = apq_constant(w.scaled(c), p, 2 * p, fam).cube_values
    np.testing.assert_allclose(a, b, rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.6, 0.6), st.integers(1, 5), st.integers(0, 6))
def test_family_growth_monotone(beta, lmax, extra):
    w = WeightSpec.power(beta)
    small = CubeFamily.interval(-1, 1, level_max=lmax)
    big = CubeFamily.interval(-1, 1, level_max=lmax + 1, random_count=extra)
    assert ap_constant(w, 2.0, big).sup_estimate >= ap_constant(w, 2.0, small).sup_estimate


def test_weight_parse():
    assert WeightSpec.parse("power:0.5").params["beta"] == 0.5
    w = WeightSpec.parse({"kind": "product", "factors": [{"kind": "power", "beta": 1.0, "exponent": 2.0}]})
    assert w.evaluate(np.array([[3.0]]))[0] == pytest.approx(9.0)
    with pytest.raises(ValueError):
        WeightSpec.parse("gauss:1")
