"""Rearrangement algorithm (RA) on discretised marginals.

Each column of an m×n matrix holds one marginal. A column is rearranged so it
is oppositely ordered to the sum of the other columns, which can only raise
the smallest row sum and lower the largest one.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import QuantileModel, as_models
from .exceptions import OutOfDomain

LOWER_GRID = "LowerGrid"
UPPER_GRID = "UpperGrid"
MAX_MIN = "MaxMinRowSum"
MIN_MAX = "MinMaxRowSum"
_OBJECTIVES = {"maxmin": MAX_MIN, "minmax": MIN_MAX, MAX_MIN: MAX_MIN, MIN_MAX: MIN_MAX}


class ClippedGridWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Discretization:
    values: np.ndarray
    clipped: bool


@dataclass
class RaMatrix:
    cells: np.ndarray
    origin: dict = field(default_factory=lambda: {"kind": "FromLiteral"})

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim == 1:
            cells = cells[:, None]
        if cells.ndim != 2 or cells.size == 0:
            raise OutOfDomain("RA matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(cells)):
            raise OutOfDomain("RA matrix entries must be finite")
        self.cells = cells

    @property
    def shape(self):
        return self.cells.shape

    def row_sums(self):
        return self.cells.sum(axis=1)


@dataclass(frozen=True)
class RaInterval:
    lower: float
    upper: float
    iterations: int
    converged: bool

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "iterations": self.iterations, "converged": self.converged}


def discretize(model: QuantileModel, N: int, t: float = 0.0, side: str = LOWER_GRID) -> Discretization:
    """N quantile nodes of ``model`` on [t, 1].

    LowerGrid takes q⁺ at levels t + (1-t)k/N and UpperGrid q⁻ at
    t + (1-t)(k+1)/N for k = 0..N-1, so the two columns bracket the law.
    Infinite nodes are replaced by the value at the neighbouring node and
    flagged.
    """
    if N < 1:
        raise OutOfDomain("N must be at least 1")
    if not 0.0 <= t < 1.0:
        raise OutOfDomain(f"t={t} outside [0, 1)")
    k = np.arange(N, dtype=float)
    if side == LOWER_GRID:
        levels = t + (1.0 - t) * k / N
    elif side == UPPER_GRID:
        levels = t + (1.0 - t) * (k + 1.0) / N
    else:
        raise OutOfDomain(f"unknown grid side {side!r}")
    if side == LOWER_GRID:
        values = np.asarray(model.qr(levels), dtype=float)
    else:
        values = np.asarray(model.ql(levels), dtype=float)
    clipped = False
    if np.isinf(values[-1]) and values[-1] > 0:
        values[-1] = values[-2] if N > 1 else model.ql(t + (1.0 - t) * (N - 0.5) / N)
        clipped = True
    if np.isinf(values[0]) and values[0] < 0:
        values[0] = values[1] if N > 1 else model.ql(t + (1.0 - t) * 0.5 / N)
        clipped = True
    if clipped:
        warnings.warn("infinite quantile node clipped to its neighbour", ClippedGridWarning, stacklevel=2)
    return Discretization(values, clipped)


def discretized_matrix(marginals: Sequence[QuantileModel], N: int, t: float = 0.0, side: str = LOWER_GRID) -> RaMatrix:
    models = as_models(marginals)
    cols = [discretize(m, N, t, side).values for m in models]
    return RaMatrix(np.column_stack(cols), {"kind": "FromDiscretization", "N": N, "level": t, "side": side})


def _objective_value(cells, objective):
    sums = cells.sum(axis=1)
    return float(sums.min() if objective == MAX_MIN else sums.max())


def _resolve(objective):
    try:
        return _OBJECTIVES[objective]
    except KeyError:
        raise OutOfDomain(f"unknown RA objective {objective!r}") from None


def ra_run(
    matrix,
    objective: str = MAX_MIN,
    max_iters: int = 1000,
    seed: int = 0,
    shuffle_start: bool = False,
    trace: Optional[list] = None,
):
    """Rearrange columns until a full sweep changes nothing.

    Returns (RaInterval, RaMatrix); both interval ends equal the objective
    value of the final matrix. ``trace``, if given, receives the objective
    value after every sweep.
    """
    objective = _resolve(objective)
    if not isinstance(matrix, RaMatrix):
        matrix = RaMatrix(matrix)
    cells = matrix.cells.copy()
    m, n = cells.shape
    if shuffle_start:
        rng = np.random.default_rng(seed)
        for j in range(n):
            cells[:, j] = cells[rng.permutation(m), j]
    rows = np.arange(m)
    sums = cells.sum(axis=1)
    sweeps = 0
    converged = n == 1
    while not converged and sweeps < max_iters:
        changed = False
        for j in range(n):
            col = cells[:, j]
            other = sums - col
            # rows by ascending partial sum, ties by row index; largest values go to smallest partial sums
            order = np.lexsort((rows, other))
            new = np.empty(m)
            new[order] = np.sort(col)[::-1]
            if not np.array_equal(new, col):
                changed = True
                cells[:, j] = new
                sums = other + new
        sweeps += 1
        if trace is not None:
            trace.append(_objective_value(cells, objective))
        converged = not changed
    value = _objective_value(cells, objective)
    return RaInterval(value, value, sweeps, converged), RaMatrix(cells, dict(matrix.origin))


def ra_interval(
    marginals: Sequence[QuantileModel],
    N: int = 10_000,
    t: float = 0.0,
    objective: str = MAX_MIN,
    max_iters: int = 1000,
    seed: int = 0,
    shuffle_start: bool = False,
) -> RaInterval:
    """RA on the lower and the upper discretisation at level t."""
    objective = _resolve(objective)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippedGridWarning)
        lo_m = discretized_matrix(marginals, N, t, LOWER_GRID)
        hi_m = discretized_matrix(marginals, N, t, UPPER_GRID)
    lo, _ = ra_run(lo_m, objective, max_iters, seed, shuffle_start)
    hi, _ = ra_run(hi_m, objective, max_iters, seed, shuffle_start)
    lower, upper = sorted((lo.lower, hi.upper))
    return RaInterval(lower, upper, max(lo.iterations, hi.iterations), lo.converged and hi.converged)


def ra_rvar_interval(
    marginals: Sequence[QuantileModel],
    t: float,
    s: float,
    N: int = 10_000,
    max_iters: int = 1000,
    seed: int = 0,
    shuffle_start: bool = False,
) -> RaInterval:
    """RA estimate of the worst average quantile of the sum over [1-t-s, 1-t].

    The slices above 1-t-s are arranged by MaxMinRowSum and the lowest
    s/(t+s) share of row sums is averaged; on the lower grid this is the value
    of an actual coupling.
    """
    if not (s > 0 and t >= 0 and t + s <= 1.0):
        raise OutOfDomain(f"need s > 0 and 0 <= t < t+s <= 1, got t={t}, s={s}")
    base = 1.0 - t - s
    keep = max(1, int(round(s / (t + s) * N)))
    ends = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippedGridWarning)
        for side in (LOWER_GRID, UPPER_GRID):
            mat = discretized_matrix(marginals, N, base, side)
            res, final = ra_run(mat, MAX_MIN, max_iters, seed, shuffle_start)
            ends.append((float(np.sort(final.row_sums())[:keep].mean()), res))
    (lo, r1), (hi, r2) = ends
    lower, upper = sorted((lo, hi))
    return RaInterval(lower, upper, max(r1.iterations, r2.iterations), r1.converged and r2.converged)


def read_matrix_csv(source) -> RaMatrix:
    """Read a matrix from a CSV path or file object; a non-numeric first row is a header."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return read_matrix_csv(fh)
    rows = [r for r in csv.reader(source) if r and any(c.strip() for c in r)]
    if not rows:
        raise OutOfDomain("empty matrix file")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise OutOfDomain(f"matrix entry is not a number: {exc}") from None
    if len({len(r) for r in data}) != 1:
        raise OutOfDomain("matrix rows have different lengths")
    return RaMatrix(np.array(data))


def write_matrix_csv(matrix, target=None) -> str:
    cells = matrix.cells if isinstance(matrix, RaMatrix) else np.asarray(matrix, dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"col{j + 1}" for j in range(cells.shape[1])])
    for row in cells:
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text


def brute_force_max_min(columns: Sequence[Sequence[float]]) -> float:
    """Largest achievable minimum row sum over all column permutations (small inputs only)."""
    from itertools import permutations, product

    cols = [np.asarray(c, dtype=float) for c in columns]
    m = len(cols[0])
    if any(len(c) != m for c in cols):
        raise OutOfDomain("columns must have equal length")
    best = -math.inf
    perms = [sorted(set(permutations(c))) for c in cols[1:]]
    for combo in product(*perms):
        s = cols[0] + sum(np.array(p) for p in combo)
        best = max(best, float(np.min(s)))
    return best


def brute_force_min_max(columns: Sequence[Sequence[float]]) -> float:
    """Smallest achievable maximum row sum over all column permutations."""
    return -brute_force_max_min([-np.asarray(c, dtype=float) for c in columns])
