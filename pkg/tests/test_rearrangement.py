import io
import warnings

import numpy as np
import pytest

from depbound import DiscreteUniform, Pareto, RaMatrix, Uniform, discretize, ra_interval, ra_run
from depbound.exceptions import OutOfDomain
from depbound.rearrangement import (
    MAX_MIN,
    MIN_MAX,
    UPPER_GRID,
    ClippedGridWarning,
    brute_force_max_min,
    brute_force_min_max,
    ra_rvar_interval,
    read_matrix_csv,
    write_matrix_csv,
)
from depbound import upper_rvar_bound


def test_discretize_examples():
    np.testing.assert_allclose(discretize(Uniform(0, 1), 4).values, [0, 0.25, 0.5, 0.75])
    np.testing.assert_allclose(discretize(DiscreteUniform((1, 2, 3)), 3).values, [1, 2, 3])
    with pytest.warns(ClippedGridWarning):
        d = discretize(Pareto(1, 3), 2, 0.0, UPPER_GRID)
    assert d.clipped
    assert d.values[0] == pytest.approx(0.5 ** (-1 / 3))


def test_identity_start_stalls_at_five():
    cols = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], dtype=float)
    interval, final = ra_run(cols, MAX_MIN)
    assert (interval.lower, interval.upper) == (5.0, 5.0)
    assert interval.converged
    assert ra_run(cols, MIN_MAX)[0].upper == 7.0


def test_single_column():
    col = np.array([[4.0], [-1.0], [2.5]])
    assert ra_run(col, MAX_MIN)[0].lower == -1.0
    assert ra_run(col, MIN_MAX)[0].upper == 4.0


def test_column_multisets_preserved():
    rng = np.random.default_rng(7)
    cells = rng.normal(size=(40, 4))
    _, final = ra_run(cells, MAX_MIN, shuffle_start=True, seed=2)
    for j in range(4):
        np.testing.assert_array_equal(np.sort(final.cells[:, j]), np.sort(cells[:, j]))


def test_monotone_sweeps():
    rng = np.random.default_rng(1)
    cells = rng.exponential(size=(60, 5))
    trace = []
    ra_run(cells, MAX_MIN, trace=trace)
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
    trace = []
    ra_run(cells, MIN_MAX, trace=trace)
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_seeded_shuffle_is_deterministic():
    cells = np.arange(30, dtype=float).reshape(10, 3) % 7
    a = ra_run(cells, MAX_MIN, seed=5, shuffle_start=True)[1].cells
    b = ra_run(cells, MAX_MIN, seed=5, shuffle_start=True)[1].cells
    np.testing.assert_array_equal(a, b)


def test_crew_min_max_reaches_true_optimum(crew):
    interval, _ = ra_run(crew, MIN_MAX)
    assert interval.upper >= brute_force_min_max(list(crew.T)) == 159.0


def test_brute_force_helpers():
    assert brute_force_max_min([[1, 2, 3]] * 3) == 6.0
    assert brute_force_max_min([[-1, 1]] * 3) == -1.0
    assert brute_force_min_max([[1, 2, 3]] * 3) == 6.0


def test_matrix_validation():
    with pytest.raises(OutOfDomain):
        RaMatrix(np.array([[1.0, np.inf]]))
    with pytest.raises(OutOfDomain):
        RaMatrix(np.zeros((0, 2)))


def test_csv_roundtrip(tmp_path):
    cells = np.array([[0.1, 2.0], [1 / 3, -4.5]])
    path = tmp_path / "m.csv"
    write_matrix_csv(RaMatrix(cells), path)
    np.testing.assert_array_equal(read_matrix_csv(path).cells, cells)
    np.testing.assert_array_equal(read_matrix_csv(io.StringIO("1,2\n3,4\n")).cells, [[1, 2], [3, 4]])
    with pytest.raises(OutOfDomain):
        read_matrix_csv(io.StringIO("a,b\n1,x\n"))


def test_interval_brackets_pareto_bound():
    ms = [Pareto(1, 2 + i) for i in range(1, 6)]
    res = ra_interval(ms, N=2000)
    assert res.lower <= res.upper
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippedGridWarning)
        assert ra_interval(ms, N=1).converged


def test_rvar_estimate_close_to_bound():
    ms = [Pareto(1, 0.5)] * 3
    est = ra_rvar_interval(ms, 0.45, 0.45, N=4000)
    bound = upper_rvar_bound(ms, 0.45, 0.45).value
    assert abs(est.upper - bound) <= 0.01 * bound
