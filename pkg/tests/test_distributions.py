import math

import numpy as np
import pytest
from scipy import integrate, stats

from depbound import Cauchy, DiscreteUniform, Exponential, Gamma, Lognormal, Normal, Pareto, PointMass, Uniform
from depbound.distributions import (
    jump,
    model_from_dict,
    model_to_dict,
    models_from_json,
    quantile,
    rvar,
    slice as dslice,
    tail_upper,
    truncate_upper,
)
from depbound.exceptions import MeanUndefined, ModelSpecError, OutOfDomain


def test_discrete_quantile_sides():
    m = DiscreteUniform((1, 2, 3))
    assert quantile(m, 1 / 3, "left") == 1
    assert quantile(m, 1 / 3, "right") == 2
    assert jump(m, 1 / 3) == pytest.approx(1.0)


def test_pareto_quantile():
    assert quantile(Pareto(1, 3), 0.875, "left") == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize(
    "model, oracle",
    [
        (Pareto(1, 3), stats.pareto(3)),
        (Lognormal(0.3, 0.7), stats.lognorm(0.7, scale=math.exp(0.3))),
        (Gamma(2.5, 1.5), stats.gamma(2.5, scale=1.5)),
        (Exponential(2.0), stats.expon(scale=0.5)),
        (Normal(1, 2), stats.norm(1, 2)),
        (Cauchy(0, 1), stats.cauchy()),
        (Uniform(-1, 3), stats.uniform(-1, 4)),
    ],
)
def test_closed_forms_against_scipy(model, oracle):
    u = np.array([1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-6])
    np.testing.assert_allclose(model.ql(u), oracle.ppf(u), rtol=1e-9, atol=1e-15)
    x = oracle.ppf(np.array([0.1, 0.5, 0.9]))
    np.testing.assert_allclose(model.cdf(x), oracle.cdf(x), rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize(
    "model, oracle",
    [
        (Lognormal(0, 1), stats.lognorm(1.0)),
        (Gamma(1, 2), stats.gamma(1, scale=2)),
        (Normal(0, 1), stats.norm()),
        (Pareto(1, 3), stats.pareto(3)),
    ],
)
def test_integral_against_quadrature(model, oracle):
    a, b = 0.15, 0.85
    ref, _ = integrate.quad(oracle.ppf, a, b, epsabs=1e-13)
    assert float(model.integral(a, b)) == pytest.approx(ref, rel=1e-9)


def test_rvar_examples():
    assert rvar(Pareto(1, 0.5), 0.1, 0.2) == pytest.approx(1 / (0.1 * 0.3), rel=1e-10)
    assert rvar(Uniform(0, 1), 0.2, 0.4) == pytest.approx(0.6, abs=1e-14)
    assert rvar(PointMass(4.5), 0.3, 0.1) == pytest.approx(4.5)
    assert rvar(Pareto(1, 0.5), 0.0, 0.5) == math.inf


def test_rvar_domain():
    with pytest.raises(OutOfDomain):
        rvar(Uniform(0, 1), 0.5, 0.0)
    with pytest.raises(OutOfDomain):
        rvar(Uniform(0, 1), 0.6, 0.5)


def test_means():
    assert Lognormal(0, 1).mean() == pytest.approx(math.exp(0.5))
    assert Gamma(1, 2).mean() == pytest.approx(2.0)
    assert Pareto(1, 3).mean() == pytest.approx(1.5)
    assert not Pareto(1, 0.5).mean_finite
    with pytest.raises(MeanUndefined):
        Cauchy(0, 1).mean()


def test_tail_upper_uniform():
    m = tail_upper(Uniform(0, 1), 0.5)
    np.testing.assert_allclose(m.ql(np.array([0.2, 0.6, 1.0])), [0.6, 0.8, 1.0])


def test_tail_upper_point_mass():
    m = tail_upper(PointMass(2.0), 0.9)
    assert float(m.ql(0.3)) == 2.0 and float(m.qr(0.7)) == 2.0


def test_slice_examples():
    m = dslice(Uniform(0, 1), 0.25, 0.75)
    np.testing.assert_allclose(m.ql(np.array([0.5, 1.0])), [0.5, 0.75])
    d = dslice(DiscreteUniform((1, 2, 3)), 0.0, 2 / 3)
    np.testing.assert_allclose(d.ql(np.array([0.25, 0.5, 0.75, 1.0])), [1, 1, 2, 2])


def test_truncate_examples():
    m = truncate_upper(Uniform(0, 2), 1.0)
    u = np.array([0.1, 0.4, 0.5, 0.9])
    np.testing.assert_allclose(m.ql(u), np.minimum(2 * u, 1.0))
    assert float(truncate_upper(PointMass(5), 3).ql(0.5)) == 3.0
    cap = Pareto(1, 3).qr(0.9)
    t = truncate_upper(Pareto(1, 3), cap)
    assert float(t.ql(1.0)) == pytest.approx(0.1 ** (-1 / 3))


def test_json_roundtrip():
    models = models_from_json('[{"family": "pareto", "params": {"scale": 1, "theta": 3}, "repeat": 2},'
                              '{"family": "discrete_uniform", "values": [1, 2, 3]}]')
    assert len(models) == 3
    assert model_from_dict(model_to_dict(models[0])) == models[0]
    assert list(models[2].values) == [1, 2, 3]


@pytest.mark.parametrize(
    "bad, key",
    [
        ({"family": "pareto", "params": {"scle": 1, "theta": 3}}, "scle"),
        ({"famly": "pareto"}, "famly"),
        ({"family": "nope"}, "nope"),
        ({"family": "pareto", "params": {"scale": 1}}, "theta"),
    ],
)
def test_bad_specs_name_the_key(bad, key):
    with pytest.raises(ModelSpecError, match=key):
        model_from_dict(bad)
