import math

import numpy as np
import pytest

from depbound import (
    Cauchy,
    DiscreteUniform,
    Exponential,
    OptimizerOptions,
    Pareto,
    PointMass,
    SimplexWeights,
    Uniform,
    lower_quantile_bound,
    lower_rvar_bound,
    r_minus,
    r_plus,
    reduced_lower_bound,
    reduced_upper_bound,
    sharpness_certificate,
    upper_quantile_bound,
    upper_rvar_bound,
)
from depbound.convolution import (
    DECREASING_DENSITIES,
    LOWER_QUANTILE,
    NLE2,
    NOT_CERTIFIED,
    UPPER_QUANTILE,
    mean_sandwich,
)
from depbound.distributions import affine, expected_shortfall, quantile, rvar, slice as dslice
from depbound.exceptions import MeanUndefined, OutOfDomain, UndefinedForm

W = SimplexWeights.from_array


def increasing_density_model():
    # density proportional to (101 - x)^(-3/2) on [1, 100]
    return affine(dslice(Pareto(1, 0.5), 0.0, 0.9), 101.0, -1.0)


def test_weights_validation():
    with pytest.raises(OutOfDomain):
        SimplexWeights((0.5, 0.6), 1.0)
    with pytest.raises(OutOfDomain):
        SimplexWeights((-0.1, 1.1), 1.0)
    with pytest.raises(OutOfDomain):
        SimplexWeights((0.1, 0.9), 1.0, floor=0.2)


def test_r_plus_examples(dice3):
    assert r_plus(dice3, W([1, 0, 0, 0])) == pytest.approx(6.0)
    assert r_plus([Uniform(0, 1)] * 2, W([0, 0.5, 0.5])) == pytest.approx(1.0)
    assert r_plus([Pareto(1, 0.5)], W([0.5, 0.5])) == pytest.approx(2.0)


def test_r_minus_examples(crew_models):
    assert r_minus(crew_models, W([0, 0.2, 0.6, 0.2])) == pytest.approx(160.0)
    assert r_minus([PointMass(1.5), PointMass(-2.0)], W([0.3, 0.3, 0.4])) == pytest.approx(-0.5)
    assert r_minus([Uniform(0, 1)] * 2, W([0.5, 0.25, 0.25])) == pytest.approx(1.0)


def test_undefined_form():
    with pytest.raises(UndefinedForm):
        r_plus([Cauchy(0, 1), Cauchy(0, 1)], W([0, 0, 1]))


def test_upper_bound_discrete(dice3):
    res = upper_quantile_bound(dice3, 0.0)
    assert res.value == 6.0
    assert res.beta == (1.0, 0.0, 0.0, 0.0)


def test_upper_bound_non_sharp():
    res = upper_quantile_bound([DiscreteUniform((-1, 1))] * 3, 0.0)
    assert res.value == 0.0
    assert res.sharpness == NOT_CERTIFIED


def test_result_value_matches_objective(triple):
    res = upper_quantile_bound(triple, 0.0)
    assert res.value == pytest.approx(4.2857, abs=1e-3)
    assert r_plus(triple, res.weights) == pytest.approx(res.value, rel=1e-12)


def test_single_marginal_lower_is_left_quantile():
    m = DiscreteUniform((1, 2, 3))
    for t in (0.2, 1 / 3, 0.5, 1.0):
        assert lower_quantile_bound([m], t).value == pytest.approx(float(quantile(m, t, "left")))
    g = Exponential(1.0)
    assert lower_quantile_bound([g], 0.4).value == pytest.approx(float(g.ql(0.4)), rel=1e-6)


def test_cauchy_lower_at_one():
    res = lower_quantile_bound([Cauchy(0, 1)] * 3, 1.0)
    assert res.value == pytest.approx(-3 * math.log(2) / math.pi, abs=1e-4)


def test_lower_bound_crew_is_valid(crew_models):
    # the attainable minimum makespan is 159, so a valid lower bound cannot exceed it
    res = lower_quantile_bound(crew_models, 1.0)
    assert res.value <= 159.0
    assert res.value == pytest.approx(154.0)


def test_upper_rvar_es_corner():
    res = upper_rvar_bound([Uniform(0, 1)] * 2, 0.0, 0.5)
    assert res.value == pytest.approx(1.5)
    assert res.beta[0] == pytest.approx(0.5)
    ms = [Pareto(1, 3), Exponential(2.0)]
    expect = sum(expected_shortfall(m, 0.3) for m in ms)
    assert upper_rvar_bound(ms, 0.0, 0.3).value == pytest.approx(expect, rel=1e-9)


def test_lower_rvar_examples():
    assert lower_rvar_bound([Uniform(0, 1)] * 2, 0.5, 0.5).value >= 0.5 - 1e-12
    pm = [PointMass(1.0), PointMass(2.5)]
    for t, s in [(0.0, 0.3), (0.4, 0.2), (0.1, 0.9)]:
        assert lower_rvar_bound(pm, t, s).value == pytest.approx(3.5)
        assert upper_rvar_bound(pm, t, s).value == pytest.approx(3.5)


def test_upper_rvar_infinite_mean():
    assert upper_rvar_bound([Pareto(1, 0.5)] * 3, 0.0, 0.5).value == math.inf


def test_reduced_equals_full_for_decreasing_density():
    for t in (0.5, 0.9):
        red, _ = reduced_upper_bound(Pareto(1, 0.5), 3, t)
        full = upper_quantile_bound([Pareto(1, 0.5)] * 3, t).value
        assert red == pytest.approx(full, rel=1e-6)


def test_reduced_dominates_full_with_increasing_density():
    m = increasing_density_model()
    red, _ = reduced_upper_bound(m, 3, 0.0)
    full = upper_quantile_bound([m] * 3, 0.0).value
    assert red > full + 1.0


def test_reduced_point_mass():
    assert reduced_upper_bound(PointMass(2.0), 4, 0.3)[0] == pytest.approx(8.0)
    assert reduced_lower_bound(PointMass(2.0), 4, 0.3)[0] == pytest.approx(8.0)


def test_reduced_lower_examples():
    assert reduced_lower_bound(Uniform(0, 1), 2, 1.0)[0] == pytest.approx(1.0, abs=1e-9)
    red, _ = reduced_lower_bound(Exponential(1.0), 3, 1.0)
    assert red == pytest.approx(3.0, abs=1e-6)
    assert red <= lower_quantile_bound([Exponential(1.0)] * 3, 1.0).value


def test_certificates(dice3):
    assert sharpness_certificate([Pareto(1, 3), Uniform(0, 1)], 0.2, UPPER_QUANTILE) == NLE2
    assert sharpness_certificate([Pareto(1, 3)] * 3, 0.9, UPPER_QUANTILE) == DECREASING_DENSITIES
    assert sharpness_certificate([DiscreteUniform((-1, 1))] * 3, 0.0, UPPER_QUANTILE) == NOT_CERTIFIED
    assert sharpness_certificate([Uniform(0, 1)] * 3, 0.5, LOWER_QUANTILE) != NOT_CERTIFIED


def test_mean_sandwich(triple):
    lo, mid, hi = mean_sandwich(triple)
    assert mid == pytest.approx(5.1487, abs=1e-4)
    assert lo >= mid >= hi
    assert mean_sandwich([PointMass(1.0)] * 3) == pytest.approx((3.0, 3.0, 3.0))
    assert mean_sandwich([Uniform(0, 1)] * 2) == pytest.approx((1.0, 1.0, 1.0), abs=1e-9)
    with pytest.raises(MeanUndefined):
        mean_sandwich([Pareto(1, 0.5)] * 2)


def test_level_domain():
    with pytest.raises(OutOfDomain):
        upper_quantile_bound([Uniform(0, 1)] * 2, 1.0)
    with pytest.raises(OutOfDomain):
        lower_quantile_bound([Uniform(0, 1)] * 2, 0.0)


def test_deterministic(triple):
    opts = OptimizerOptions(seed=3)
    a = upper_quantile_bound(triple, 0.2, opts)
    b = upper_quantile_bound(triple, 0.2, opts)
    assert a.value == b.value and a.beta == b.beta


def test_truncation_note_and_value():
    ms = [Pareto(1, 0.5)] * 3
    res = upper_quantile_bound(ms, 0.9)
    assert res.value == pytest.approx(2400.0, rel=1e-6)
    assert any("truncated" in n for n in res.notes)
    assert upper_quantile_bound(ms, 0.9, truncate=False).value == pytest.approx(2400.0, rel=1e-6)


def test_to_dict_json_safe():
    d = upper_rvar_bound([Pareto(1, 0.5)] * 2, 0.0, 0.5).to_dict()
    assert d["value"] == "inf"
    assert np.isclose(sum(d["beta"]), 0.5)


def test_rvar_scale_identity():
    m = Pareto(1, 3)
    t, beta, alpha = 0.6, 0.1, 0.2
    from depbound.distributions import tail_upper

    assert rvar(tail_upper(m, t), beta, alpha) == pytest.approx(rvar(m, (1 - t) * beta, (1 - t) * alpha), rel=1e-10)
