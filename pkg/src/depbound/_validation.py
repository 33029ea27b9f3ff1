"""Input checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from ._simplex import OptimizerOptions
from .distributions import as_models
from .exceptions import OutOfDomain


def check_levels(T, lo_open=False, hi_open=False, strictly_increasing=False) -> np.ndarray:
    """1-d float array of probability levels."""
    arr = np.asarray(T, dtype=float)
    if arr.ndim == 0:
        arr = arr[None]
    arr = check_array(arr.reshape(-1, 1), dtype=float, ensure_all_finite=True).ravel()
    if np.any(arr < 0) or np.any(arr > 1) or (lo_open and np.any(arr == 0)) or (hi_open and np.any(arr == 1)):
        raise OutOfDomain("levels must lie in the unit interval")
    if strictly_increasing and np.any(np.diff(arr) <= 0):
        raise OutOfDomain("levels must be strictly increasing")
    return arr


def check_matrix(X) -> np.ndarray:
    """Finite 2-d float matrix with at least one row and column."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return check_array(arr, dtype=float, ensure_all_finite=True, ensure_min_samples=1, ensure_min_features=1)


def check_marginals(X) -> list:
    models = as_models(X)
    if not models:
        raise OutOfDomain("at least one marginal is required")
    return models


def options_from(est) -> OptimizerOptions:
    return OptimizerOptions(
        grid_res=est.grid_res,
        max_evals=est.max_evals,
        tol=est.tol,
        seed=est.seed,
    )
