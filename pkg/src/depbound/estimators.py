"""scikit-learn style wrappers.

``fit`` takes the marginals (models, dicts or a JSON-like list) and
``predict`` maps probability levels to bound values, so the objects compose
with ``get_params``/``set_params``/``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import convolution as cb
from ._validation import check_levels, check_marginals, check_matrix, options_from
from .dual import dual_bound
from .exceptions import OutOfDomain
from .rearrangement import MAX_MIN, RaMatrix, ra_interval, ra_run
from .structures import sample, structure_for


class _OptimizerParams:
    def _opts(self):
        return options_from(self)


class ConvolutionBound(_OptimizerParams, BaseEstimator):
    """Convolution bounds as an estimator.

    direction is one of "upper", "lower", "upper_rvar", "lower_rvar"; the RVaR
    variants read ``window`` as the window length s.
    """

    def __init__(self, direction="upper", window=None, truncate=True, grid_res=12, max_evals=10_000, tol=1e-9, seed=0):
        self.direction = direction
        self.window = window
        self.truncate = truncate
        self.grid_res = grid_res
        self.max_evals = max_evals
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        self.marginals_ = check_marginals(X)
        self.n_marginals_ = len(self.marginals_)
        if self.direction not in ("upper", "lower", "upper_rvar", "lower_rvar"):
            raise OutOfDomain(f"unknown direction {self.direction!r}")
        if self.direction.endswith("rvar") and self.window is None:
            raise OutOfDomain("RVaR bounds need a window length")
        return self

    def _bound(self, t):
        opts = self._opts()
        if self.direction == "upper":
            return cb.upper_quantile_bound(self.marginals_, t, opts, truncate=self.truncate)
        if self.direction == "lower":
            return cb.lower_quantile_bound(self.marginals_, t, opts)
        if self.direction == "upper_rvar":
            return cb.upper_rvar_bound(self.marginals_, t, self.window, opts)
        return cb.lower_rvar_bound(self.marginals_, t, self.window, opts)

    def bounds(self, T):
        check_is_fitted(self, "marginals_")
        return [self._bound(float(t)) for t in check_levels(T)]

    def predict(self, T):
        return np.array([r.value for r in self.bounds(T)])

    def transform(self, T):
        """Rows (value, beta_0, ..., beta_n) per level."""
        return np.array([(r.value,) + tuple(r.beta) for r in self.bounds(T)])


class DualBound(_OptimizerParams, BaseEstimator):
    def __init__(self, grid_res=12, max_evals=10_000, tol=1e-9, seed=0):
        self.grid_res = grid_res
        self.max_evals = max_evals
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        self.marginals_ = check_marginals(X)
        self.n_marginals_ = len(self.marginals_)
        return self

    def predict(self, T):
        check_is_fitted(self, "marginals_")
        opts = self._opts()
        return np.array([dual_bound(self.marginals_, float(t), opts).value for t in check_levels(T, hi_open=True)])


class Rearrangement(TransformerMixin, BaseEstimator):
    """Rearrangement algorithm.

    ``fit`` accepts either a numeric matrix (columns are marginals) or a list
    of marginal models, which are discretised with ``N`` nodes above ``level``.
    """

    def __init__(self, objective=MAX_MIN, N=10_000, level=0.0, max_iters=1000, seed=0, shuffle_start=False):
        self.objective = objective
        self.N = N
        self.level = level
        self.max_iters = max_iters
        self.seed = seed
        self.shuffle_start = shuffle_start

    def _is_numeric(self, X):
        try:
            np.asarray(X, dtype=float)
            return True
        except (TypeError, ValueError):
            return False

    def fit(self, X, y=None):
        if self._is_numeric(X):
            cells = check_matrix(X)
            self.interval_, final = ra_run(RaMatrix(cells), self.objective, self.max_iters, self.seed, self.shuffle_start)
            self.matrix_ = final.cells
        else:
            models = check_marginals(X)
            self.interval_ = ra_interval(
                models, self.N, self.level, self.objective, self.max_iters, self.seed, self.shuffle_start
            )
            self.matrix_ = None
        return self

    def transform(self, X):
        """Rearranged copy of a numeric matrix."""
        cells = check_matrix(X)
        _, final = ra_run(RaMatrix(cells), self.objective, self.max_iters, self.seed, self.shuffle_start)
        return final.cells

    def predict(self, X=None):
        check_is_fitted(self, "interval_")
        return np.array([self.interval_.lower, self.interval_.upper])


class ExtremalStructure(_OptimizerParams, BaseEstimator):
    """Dependence structure of kind "candidate", "beta" or "gamma" at a level."""

    def __init__(self, kind="beta", level=0.0, grid_res=12, max_evals=10_000, tol=1e-9, seed=0):
        self.kind = kind
        self.level = level
        self.grid_res = grid_res
        self.max_evals = max_evals
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        models = check_marginals(X)
        self.structure_ = structure_for(self.kind, models, float(self.level), self._opts())
        self.guaranteed_infimum_ = self.structure_.guaranteed_infimum
        return self

    def sample(self, n_samples, seed=None):
        check_is_fitted(self, "structure_")
        return sample(self.structure_, int(n_samples), self.seed if seed is None else seed)

    def transform(self, n_samples):
        """Sampled coordinates, one row per draw."""
        return self.sample(n_samples).values
