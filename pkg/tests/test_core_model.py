import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughfrac.exceptions import DomainError, HypothesisViolation, NonIntegrable
from roughfrac.exponents import conjugate, derive_exponents, proof_exponents
from roughfrac.functions import (
    SampledFunction,
    dumps_sfn,
    indicator,
    loads_sfn,
    parse_generator,
    read_sfn,
    tent,
    write_sfn,
)
from roughfrac.kernels import (
    KernelSpec,
    block_norm,
    kernel_eval,
    kernel_sphere_integral,
    kernel_sphere_norm,
    parse_kernel,
)

# frozen: sqrt(int_0^{2pi} |cos t|^{-1/2} dt) by scipy.integrate.quad
ROUGH_KERNEL_L2 = 3.238553723063414


# exponents -------------------------------------------------------------------


def test_derive_exponents_two_factors():
    cfg = derive_exponents(2, 1, 0.25, 2, [4, 4])
    assert cfg.p_out == pytest.approx(4.0)
    assert cfg.q_per_factor == pytest.approx((8.0, 8.0))
    assert cfg.s_prime == pytest.approx(2.0)


def test_negative_output_exponent_rejected():
    with pytest.raises(HypothesisViolation):
        derive_exponents(1, 1, 0.5, 2, [4])
    # with a bounded kernel the s' gate passes and the output exponent fails
    with pytest.raises(HypothesisViolation) as exc:
        derive_exponents(1, 1, 0.5, math.inf, [4])
    assert exc.value.hypothesis.startswith("1/p =")


def test_s_prime_bound_rejected():
    with pytest.raises(HypothesisViolation) as exc:
        derive_exponents(2, 2, 1.0, 1.25, [2, 2])
    assert exc.value.hypothesis == "1 <= s' < mn/alpha"


@pytest.mark.parametrize("alpha", [0.0, 1.0, 3.0, -0.1])
def test_alpha_range(alpha):
    with pytest.raises(HypothesisViolation, match="0 < alpha < mn"):
        derive_exponents(1, 1, alpha, math.inf, [1.5])


def test_conjugate():
    assert conjugate(2) == 2
    assert conjugate(math.inf) == 1
    assert conjugate(1) == math.inf


def test_proof_exponents_holder_split():
    cfg = derive_exponents(2, 1, 0.5, 2, [3, 3])
    pe = proof_exponents(cfg)
    assert pe.holder_split() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(HypothesisViolation):
        proof_exponents(cfg, epsilon=pe.eps_bound)


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(1, 3),
    n=st.integers(1, 2),
    frac=st.floats(0.05, 0.95),
    data=st.data(),
)
def test_exponent_round_trip(m, n, frac, data):
    mn = m * n
    alpha = frac * min(mn, n)
    hi = mn / alpha
    p_in = [data.draw(st.floats(max(1.0, hi * 0.51), hi * 0.99)) for _ in range(m)]
    try:
        cfg = derive_exponents(m, n, alpha, math.inf, p_in)
    except HypothesisViolation:
        return
    assert abs(1.0 / cfg.p_out - (sum(1 / p for p in p_in) - alpha / n)) < 1e-12


# block norm and kernels --------------------------------------------------------


def test_block_norm_examples():
    assert block_norm([3, 4, 0, 0], n=2) == pytest.approx(5.0)
    assert block_norm([1, -2, 2], n=1) == pytest.approx(5.0)
    assert block_norm([0, 0], n=2) == 0.0


def test_kernel_eval_examples():
    k1 = KernelSpec.constant(1.0, 1, 2)
    assert kernel_eval(k1, [0.3, -0.7]) == 1.0
    kr = KernelSpec.first_coordinate_power(0.25, 2, 1)
    assert kernel_eval(kr, [1.0, 0.0]) == pytest.approx(1.0)
    assert kernel_eval(kr, [2.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        kernel_eval(kr, [0.0, 0.0])


def test_kernel_homogeneity():
    rng = np.random.default_rng(1)
    kr = KernelSpec.first_coordinate_power(0.25, 2, 1)
    y = rng.normal(size=(100, 2))
    base = kr.evaluate(y)
    for lam in (1e-3, 1.0, 1e3):
        np.testing.assert_allclose(kr.evaluate(lam * y), base, rtol=1e-12)
    np.testing.assert_array_equal(kr.evaluate(4.0 * y), base)


def test_sphere_norm_constant_kernels():
    assert kernel_sphere_norm(KernelSpec.constant(1, 1, 2), 2) == pytest.approx(math.sqrt(2 * math.pi), rel=0.02)
    assert kernel_sphere_norm(KernelSpec.constant(1, 1, 3), 3) == pytest.approx((4 * math.pi) ** (1 / 3), rel=0.02)


def test_sphere_norm_rough_kernel_against_quad():
    kr = KernelSpec.first_coordinate_power(0.25, 2, 1)
    assert kernel_sphere_norm(kr, 2) == pytest.approx(ROUGH_KERNEL_L2, rel=0.02)


def test_sphere_norm_non_integrable_flag():
    kr = KernelSpec.first_coordinate_power(0.25, 2, 1)
    with pytest.raises(NonIntegrable) as exc:
        kernel_sphere_norm(kr, 6)
    assert exc.value.estimate > 0


def test_sphere_integral_monotone_in_s():
    k2 = KernelSpec.constant(2.0, 1, 2)
    i2 = kernel_sphere_integral(k2, 2)[-1][1]
    i3 = kernel_sphere_integral(k2, 3)[-1][1]
    assert i3 >= i2 * 0.98


def test_parse_kernel():
    assert parse_kernel("constant:2", 1, 1).params["c"] == 2.0
    assert parse_kernel("power:0.25", 2, 1).s == 2.0
    assert parse_kernel("sign", 1, 2).describe() == "sign:0"
    with pytest.raises(ValueError):
        parse_kernel("bogus", 1, 1)


# sampled functions -------------------------------------------------------------


def test_outside_box_is_zero():
    f = indicator(-1, 1, cells=8)
    np.testing.assert_array_equal(f(np.array([[-1.5], [1.01], [7.0]])), 0.0)
    g = tent(-1, 1, dim=2, cells=8, interp="multilinear")
    np.testing.assert_array_equal(g(np.array([[3.0, 0.0], [0.0, -1.2]])), 0.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=12), st.sampled_from(["nearest", "multilinear"]))
def test_sfn_round_trip(values, interp):
    f = SampledFunction(1, (-0.5,), 0.25, (len(values),), np.array(values), interp)
    g = loads_sfn(dumps_sfn(f))
    np.testing.assert_array_equal(g.values, f.values)
    assert (g.origin, g.spacing, g.shape, g.interp) == (f.origin, f.spacing, f.shape, f.interp)


def test_sfn_file_round_trip(tmp_path):
    f = tent(-1, 1, dim=2, cells=6)
    write_sfn(f, tmp_path / "t.sfn")
    g = read_sfn(tmp_path / "t.sfn")
    np.testing.assert_array_equal(g.values, f.values)


def test_sfn_rejects_garbage():
    with pytest.raises(ValueError):
        loads_sfn("not an sfn file\n")


@pytest.mark.parametrize("spec", ["chi:-1:1", "tent:0:2", "pow:-0.3:0:1", "randpc:4:3"])
def test_generators_parse(spec):
    f = parse_generator(spec, 1, 16)
    assert np.any(f.values != 0)


def test_bad_generator():
    with pytest.raises(ValueError):
        parse_generator("gauss:1:2")
