import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughfrac.exceptions import NonFiniteWeight
from roughfrac.functions import SampledFunction, from_callable, indicator
from roughfrac.norms import NormSpec, lp_norm, weak_lp_quasinorm, weighted_norm, weighted_weak_quasinorm
from roughfrac.weights import WeightSpec

ZERO = SampledFunction(1, (0.0,), 0.5, (4,), np.zeros(4))


def test_lp_norm_examples():
    assert lp_norm(indicator(0, 2, cells=64), 2) == pytest.approx(math.sqrt(2), abs=2 / 64)
    assert lp_norm(ZERO, 3) == 0.0
    ramp = from_callable(lambda x: x[:, 0], [0.0], [1.0], 256)
    assert lp_norm(ramp, 3) == pytest.approx(0.25 ** (1 / 3), rel=0.01)


def test_weak_examples():
    assert weak_lp_quasinorm(indicator(0, 1, cells=16), 2) == pytest.approx(1.0)
    assert weak_lp_quasinorm(ZERO, 2) == 0.0
    f = SampledFunction(1, (0.0,), 1.0, (3,), np.array([3.0, 2.0, 1.0]))
    assert weak_lp_quasinorm(f, 1) == 4.0


def test_weighted_examples():
    f = indicator(0, 1, cells=64)
    one = WeightSpec.constant(1.0)
    for kind in ("weighted_multiplier", "weighted_measure"):
        assert weighted_norm(f, NormSpec(kind, 2.0, one)) == pytest.approx(lp_norm(f, 2.0), rel=1e-12)
    x = WeightSpec.power(1.0)
    assert weighted_norm(f, NormSpec("weighted_multiplier", 1.0, x)) == pytest.approx(0.5, abs=1 / 64)


def test_weighted_weak_examples():
    f = indicator(0, 1, cells=16)
    assert weighted_weak_quasinorm(f, 2, WeightSpec.constant(1.0)) == pytest.approx(weak_lp_quasinorm(f, 2), rel=1e-10)
    assert weighted_weak_quasinorm(ZERO, 2, WeightSpec.constant(2.0)) == 0.0
    assert weighted_weak_quasinorm(f, 2, WeightSpec.constant(2.0)) == pytest.approx(math.sqrt(2))


def test_convention_consistency_random_pairs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = SampledFunction(1, (-1.0,), 0.1, (20,), rng.normal(size=20))
        w = WeightSpec.power(float(rng.uniform(-0.4, 1.0)))
        a = weighted_norm(f, NormSpec("weighted_multiplier", 2.0, w))
        b = weighted_norm(f, NormSpec("weighted_measure", 2.0, w.pow(2.0)))
        assert a == pytest.approx(b, rel=1e-10)


def test_non_finite_weight_on_support():
    f = SampledFunction(1, (-0.5,), 0.5, (2,), np.ones(2))  # a cell center at 0 would be needed
    g = SampledFunction(1, (-0.25,), 0.5, (1,), np.ones(1))  # center exactly at 0
    with pytest.raises(NonFiniteWeight):
        weighted_norm(g, NormSpec("weighted_measure", 2.0, WeightSpec.power(-0.5)))
    assert weighted_norm(f, NormSpec("weighted_measure", 2.0, WeightSpec.power(-0.5))) > 0


def test_norm_spec_validation():
    with pytest.raises(ValueError):
        NormSpec("strong", 0.5)
    with pytest.raises(ValueError):
        NormSpec("weighted_measure", 2.0)
    with pytest.raises(ValueError):
        NormSpec("strong", 2.0, WeightSpec.constant(1.0))


def test_grid_refinement_is_order_h():
    for cells in (32, 64):
        f = indicator(0.1, 1.3, cells=cells)
        h = f.spacing
        assert abs(lp_norm(f, 2) - math.sqrt(1.2)) <= 2 * h


values = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30)


@settings(max_examples=80, deadline=None)
@given(values, st.floats(1.0, 6.0))
def test_weak_below_strong(vals, p):
    f = SampledFunction(1, (0.0,), 0.3, (len(vals),), np.array(vals))
    assert weak_lp_quasinorm(f, p) <= lp_norm(f, p) * (1 + 1e-12)


@settings(max_examples=80, deadline=None)
@given(values, st.floats(1.0, 6.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity(vals, p, c):
    f = SampledFunction(1, (0.0,), 0.3, (len(vals),), np.array(vals))
    g = f.scaled(c)
    w = WeightSpec.power(0.5)
    assert lp_norm(g, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12, abs=1e-300)
    assert weak_lp_quasinorm(g, p) == pytest.approx(abs(c) * weak_lp_quasinorm(f, p), rel=1e-12, abs=1e-300)
    spec = NormSpec("weighted_measure", p, w)
    assert weighted_norm(g, spec) == pytest.approx(abs(c) * weighted_norm(f, spec), rel=1e-12, abs=1e-300)
