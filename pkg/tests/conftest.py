import numpy as np
import pytest

from depbound import DiscreteUniform, Gamma, Lognormal, Pareto

CREW = np.array(
    [[44, 10, 24], [66, 32, 37], [67, 48, 41], [71, 57, 43], [87, 60, 83]],
    dtype=float,
)

TRIPLES = [
    [Pareto(1, 3), Lognormal(0, 1), Gamma(1, 2)],
    [Pareto(1, 1 / 3), Lognormal(0, 1), Gamma(1, 2)],
    [Pareto(1, 3), Lognormal(-1, 1), Gamma(1, 2)],
    [Pareto(1, 3), Lognormal(0, 1), Gamma(3, 2)],
]


@pytest.fixture
def crew():
    return CREW.copy()


@pytest.fixture
def crew_models():
    return [DiscreteUniform(tuple(c)) for c in CREW.T]


@pytest.fixture
def dice3():
    return [DiscreteUniform((1, 2, 3))] * 3


@pytest.fixture
def triple():
    return list(TRIPLES[0])
