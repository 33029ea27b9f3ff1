"""Two uses of the bounds: aggregated Kolmogorov-Smirnov critical values and
crew-scheduling makespan bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from ._simplex import OptimizerOptions
from .convolution import SimplexWeights, lower_quantile_bound, reduced_upper_bound
from .distributions import DiscreteUniform, QuantileModel, _as_array, _unwrap
from .exceptions import OutOfDomain
from .rearrangement import MIN_MAX, RaMatrix, ra_run


class OutOfRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class KSStatistic(QuantileModel):
    """Two-sample KS statistic for equal sample sizes M.

    sqrt(M/2)·D is treated as Kolmogorov distributed with the finite-sample
    shift z -> z + 1/(6 sqrt(M)) + (z - 1)/(4M).
    """

    M: int = 100
    family = "ks"

    def __post_init__(self):
        if self.M < 2:
            raise OutOfDomain("sample size M must be at least 2")

    @property
    def _c(self):
        return math.sqrt(self.M / 2.0)

    def _shift(self, z):
        return z + 1.0 / (6.0 * math.sqrt(self.M)) + (z - 1.0) / (4.0 * self.M)

    def survival(self, x):
        x = _as_array(x)
        zp = self._shift(self._c * np.maximum(x, 0.0))
        out = np.where(x < 0, 1.0, np.where(zp > 0, special.kolmogorov(np.maximum(zp, 0.0)), 1.0))
        return _unwrap(out, x)

    def cdf(self, x):
        return _unwrap(1.0 - np.asarray(self.survival(x)), x)

    def _ql(self, u):
        zp = special.kolmogi(np.clip(1.0 - u, 0.0, 1.0))
        inv_m = 1.0 / (4.0 * self.M)
        z = (zp - 1.0 / (6.0 * math.sqrt(self.M)) + inv_m) / (1.0 + inv_m)
        return np.maximum(z / self._c, 0.0)

    def _integral(self, a, b):
        # ∫_a^b q du = (1-a) q_a - (1-b) q_b + ∫_{q_a}^{q_b} S(x) dx
        a = np.atleast_1d(a)
        b = np.atleast_1d(b)
        qa = self._ql(a)
        qb = self._ql(b)
        out = np.empty(a.shape)
        for k in range(a.size):
            tail = 0.0 if b[k] >= 1.0 else (1.0 - b[k]) * qb[k]
            body, _ = integrate.quad(lambda x: float(self.survival(x)), qa[k], qb[k], epsabs=1e-14, epsrel=1e-12, limit=200)
            out[k] = (1.0 - a[k]) * qa[k] - tail + body
        return out


def ks_critical_value(K: int, M: int, gamma: float, opts: Optional[OptimizerOptions] = None) -> float:
    """Critical value at level gamma for the sum of K two-sample KS statistics,
    valid under any dependence between the K tests."""
    if K < 1:
        raise OutOfDomain("K must be at least 1")
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise OutOfDomain(f"gamma={gamma} outside (0, 1)")
    if gamma > 0.3:
        warnings.warn("gamma above 0.3: the bound may not be sharp here", OutOfRegimeWarning, stacklevel=2)
    value, _ = reduced_upper_bound(KSStatistic(int(M)), int(K), 1.0 - gamma)
    return float(value)


# crew scheduling ----------------------------------------------------------------


@dataclass
class ScheduleMatrix:
    """Rows are crews, columns are operations."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim == 1:
            cells = cells[:, None]
        if cells.ndim != 2 or cells.size == 0:
            raise OutOfDomain("schedule matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise OutOfDomain("schedule matrix entries must be finite and nonnegative")
        self.cells = cells


@dataclass(frozen=True)
class ScheduleResult:
    lower_bound: float
    bound_weights: SimplexWeights
    schedule: np.ndarray
    makespan: float
    optimal_certified: bool

    def to_dict(self):
        return {
            "lower_bound": self.lower_bound,
            "bound_beta": list(self.bound_weights.beta),
            "schedule": self.schedule.tolist(),
            "makespan": self.makespan,
            "optimal_certified": self.optimal_certified,
        }


def _matrix(matrix):
    if isinstance(matrix, ScheduleMatrix):
        return matrix.cells
    if isinstance(matrix, RaMatrix):
        return ScheduleMatrix(matrix.cells).cells
    return ScheduleMatrix(matrix).cells


def crew_schedule_bound(matrix, opts: Optional[OptimizerOptions] = None):
    """Lower bound on the minimal makespan: the best-case q⁻_1 bound for the columns."""
    cells = _matrix(matrix)
    models = [DiscreteUniform(tuple(col)) for col in cells.T]
    res = lower_quantile_bound(models, 1.0, opts, certify=False)
    return float(res.value), res.weights


def greedy_schedule(matrix) -> np.ndarray:
    """Largest-first: each column, taken by decreasing range, sends its largest
    remaining value to the currently lightest crew."""
    cells = _matrix(matrix)
    m, n = cells.shape
    order = sorted(range(n), key=lambda j: (-np.ptp(cells[:, j]), j))
    out = np.zeros_like(cells)
    sums = np.zeros(m)
    for j in order:
        rows = np.lexsort((np.arange(m), sums))
        out[rows, j] = np.sort(cells[:, j])[::-1]
        sums += out[:, j]
    return out


def crew_schedule_search(matrix, restarts: int = 8, seed: int = 0, opts: Optional[OptimizerOptions] = None) -> ScheduleResult:
    """Best schedule among the greedy baseline, RA from the given matrix, and
    RA from ``restarts`` seeded shuffles."""
    cells = _matrix(matrix)
    bound, weights = crew_schedule_bound(cells, opts)
    candidates = [greedy_schedule(cells)]
    _, final = ra_run(RaMatrix(cells), MIN_MAX)
    candidates.append(final.cells)
    for k in range(restarts):
        _, final = ra_run(RaMatrix(cells), MIN_MAX, seed=seed + k, shuffle_start=True)
        candidates.append(final.cells)
    spans = [float(c.sum(axis=1).max()) for c in candidates]
    best = int(np.argmin(spans))
    makespan = spans[best]
    return ScheduleResult(bound, weights, candidates[best], makespan, abs(makespan - bound) <= 1e-9)
