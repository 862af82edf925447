import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughfrac.exceptions import HypothesisViolation
from roughfrac.exponents import derive_exponents
from roughfrac.functions import SampledFunction, indicator, tent
from roughfrac.kernels import KernelSpec
from roughfrac.operators import (
    EvalSettings,
    eval_field,
    eval_I,
    eval_M,
    lemma1_constant,
    lemma1_majorant,
    point_profile,
    welland_constant,
    welland_majorant,
)

# frozen: 4 * trapezoid of 1/(u+v) on [0,1]^2 (4000^2 nodes, corner cell excised)
TRAPEZOID_8LN2 = 5.545563676340683

UNIT11 = KernelSpec.constant(1.0, 1, 1)
CFG11 = derive_exponents(1, 1, 0.5, math.inf, [1.5])
CHI = (indicator(-1, 1, cells=32),)


def test_riesz_potential_at_origin():
    assert eval_I(CHI, UNIT11, CFG11, [0.0]) == pytest.approx(4.0, rel=0.01)


def test_zero_factor():
    zero = SampledFunction(1, (-1.0,), 0.5, (4,), np.zeros(4))
    k = KernelSpec.constant(1.0, 2, 1)
    cfg = derive_exponents(2, 1, 1.0, math.inf, [1.5, 1.5])
    assert eval_I((CHI[0], zero), k, cfg, [0.3]) == 0.0
    assert eval_M((zero, CHI[0]), k, cfg, [0.3]) == 0.0


def test_bilinear_riesz_against_trapezoid():
    k = KernelSpec.constant(1.0, 2, 1)
    cfg = derive_exponents(2, 1, 1.0, math.inf, [1.5, 1.5])
    assert eval_I(CHI * 2, k, cfg, [0.0]) == pytest.approx(TRAPEZOID_8LN2, rel=0.01)


def test_maximal_at_origin_slack_band():
    s4 = EvalSettings(rho=4)
    m = eval_M(CHI, UNIT11, CFG11, [0.0], s4)
    assert 2.0 * 0.98 <= m <= 2.0 * s4.slack(1, 0.5)
    assert eval_M(CHI, UNIT11, CFG11, [0.0], EvalSettings(rho=16)) == pytest.approx(2.0, rel=0.02)


def test_maximal_far_point():
    val = eval_M(CHI, UNIT11, CFG11, [10.0], EvalSettings(rho=16))
    assert val == pytest.approx(2 / math.sqrt(11), rel=0.02)


def test_grid_sup_sandwich():
    # M over all r is at most slack * grid max; a fine grid exposes the true sup
    fine = eval_M(CHI, UNIT11, CFG11, [0.37], EvalSettings(rho=64))
    for rho in (2, 4, 8):
        s = EvalSettings(rho=rho)
        coarse = eval_M(CHI, UNIT11, CFG11, [0.37], s)
        assert coarse <= fine * (1 + 1e-3)
        assert fine <= coarse * s.slack(1, 0.5) * (1 + 1e-3)


def test_lemma1_collapse_equals_maximal():
    for x in ([0.0], [0.8], [-2.5]):
        a = lemma1_majorant(CHI, CFG11, x)
        b = eval_M(CHI, UNIT11, CFG11, x)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


def test_lemma1_majorant_closed_form():
    cfg = derive_exponents(1, 1, 0.25, 2.0, [3.0])
    val = lemma1_majorant(CHI, cfg, [0.0], EvalSettings(rho=16))
    assert val == pytest.approx(math.sqrt(2.0), rel=0.02)


def test_lemma1_zero_and_hypothesis():
    zero = SampledFunction(1, (0.0,), 1.0, (2,), np.zeros(2))
    assert lemma1_majorant((zero,), CFG11, [0.0]) == 0.0
    cfg = derive_exponents(2, 1, 0.5, 2.0, [3.0, 3.0])
    object.__setattr__(cfg, "alpha", 1.5)
    with pytest.raises(HypothesisViolation, match="alpha s' < mn"):
        lemma1_majorant(CHI * 2, cfg, [0.0])


def test_lemma1_constant_unit_kernel():
    # unit kernel: K is the volume of the unit block ball
    assert lemma1_constant(KernelSpec.constant(1.0, 2, 1), 2.0) == pytest.approx(math.sqrt(2.0))
    assert lemma1_constant(KernelSpec.constant(3.0, 1, 2)) == pytest.approx(3.0)


def test_welland_closed_form():
    res = welland_majorant(CHI, UNIT11, CFG11, [0.0], 0.25, EvalSettings(rho=16))
    bound, c_proof = res
    assert bound == pytest.approx(2.0, rel=0.02)
    assert c_proof == pytest.approx(welland_constant(0.25, 1, 0.5))
    assert abs(res.I) <= c_proof * bound
    assert res.delta == pytest.approx(1.0, rel=0.1)


def test_welland_zero_and_boundary():
    zero = SampledFunction(1, (0.0,), 1.0, (2,), np.zeros(2))
    assert welland_majorant((zero,), UNIT11, CFG11, [0.0], 0.25).bound == 0.0
    with pytest.raises(HypothesisViolation):
        welland_majorant(CHI, UNIT11, CFG11, [0.0], 0.5)


def test_eval_field_zero_inputs():
    zero = SampledFunction(1, (0.0,), 1.0, (2,), np.zeros(2))
    s = EvalSettings().with_grid([-1.0], 0.5, [4])
    for op in ("I", "M", "I_smooth", "M_smooth"):
        field = eval_field(op, (zero,), UNIT11, CFG11, s)
        assert field.shape == (4,)
        np.testing.assert_array_equal(field.values, 0.0)


def test_eval_field_matches_pointwise():
    s = EvalSettings().with_grid([-2.0], 1.0, [4])
    field = eval_field("I", CHI, UNIT11, CFG11, s)
    for x, v in zip(s.x_points(), field.values):
        assert v == eval_I(CHI, UNIT11, CFG11, x, s)


@pytest.mark.parametrize("lam,make", [(2.0, indicator), (4.0, tent)])
def test_dilation_homogeneity(lam, make):
    f = make(-1, 1, cells=32)
    g = make(-0.5, 1.5, cells=32)
    k = KernelSpec.first_coordinate_power(0.25, 2, 1)
    cfg = derive_exponents(2, 1, 0.5, 2.0, [3.0, 3.0])
    for x in ([0.1], [0.7]):
        lhs = eval_I((f.dilate(lam), g.dilate(lam)), k, cfg, x)
        rhs = lam**-0.5 * eval_I((f, g), k, cfg, [lam * x[0]])
        assert lhs == pytest.approx(rhs, rel=1e-3)


def test_signed_vs_absolute():
    f = SampledFunction(1, (-1.0,), 0.5, (4,), np.array([1.0, -1.0, 1.0, -1.0]))
    prof = point_profile((f,), UNIT11, 0.5, [0.0], orders=(0.5,))
    assert abs(prof.I) < prof.I_abs
    neg = f.scaled(-1.0)
    assert eval_M((neg,), UNIT11, CFG11, [0.0]) == pytest.approx(eval_M((f,), UNIT11, CFG11, [0.0]))


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.floats(0.0, 3.0), min_size=8, max_size=8),
    st.lists(st.floats(0.0, 1.0), min_size=8, max_size=8),
    st.floats(-1.5, 1.5),
)
def test_maximal_monotone_in_f(vals, bumps, x):
    f = SampledFunction(1, (-1.0,), 0.25, (8,), np.array(vals))
    g = f.with_values(f.values + np.array(bumps))
    assert eval_M((g,), UNIT11, CFG11, [x]) >= eval_M((f,), UNIT11, CFG11, [x]) * (1 - 1e-12)
