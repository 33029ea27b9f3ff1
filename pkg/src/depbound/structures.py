"""Worst-case and suboptimal dependence structures built from simplex weights.

With U ~ U[0,1] and an independent branch index K (P(K=i) = beta_i/(1-beta_0)),
coordinate i takes the upper slice q⁻_{1-a_i U} on K=i and the lower slice
q⁻_{(1-a_i) U} otherwise, where a_i = beta_i/(1-beta_0). The essential
infimum of the sum is the minimum over active branches of

    h_i(u) = q⁻_{1-a_i u}(mu_i) + sum_{j != i} q⁻_{(1-a_j) u}(mu_j).

The candidate structure uses these branches on {U < 1-beta_0} and places the
middle slices, coupled to a constant sum, on the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._simplex import OptimizerOptions, search
from .convolution import SimplexWeights, r_plus, upper_quantile_bound
from .distributions import QuantileModel, Uniform, as_models, tail_upper
from .exceptions import BodyNotConstructible, DegenerateBeta, OutOfDomain

CANDIDATE = "Candidate"
SUBOPTIMAL_BETA = "SuboptimalBeta"
SUBOPTIMAL_GAMMA = "SuboptimalGamma"

GRID_POINTS = 2**12
U_FLOOR = 1e-12


@dataclass(frozen=True)
class DependenceStructure:
    kind: str
    weights: SimplexWeights
    marginals: tuple
    guaranteed_infimum: float
    body_sum: Optional[float] = None

    @property
    def n(self):
        return len(self.marginals)

    def branch_probabilities(self):
        b = np.asarray(self.weights.beta, dtype=float)
        if b[0] >= 1.0:
            return np.full(self.n, 1.0 / self.n)
        return b[1:] / (1.0 - b[0])

    def to_dict(self):
        return {
            "kind": self.kind,
            "beta": list(self.weights.beta),
            "guaranteed_infimum": self.guaranteed_infimum,
            "body_sum": self.body_sum,
        }


@dataclass(frozen=True)
class StructureSample:
    values: np.ndarray
    branch: np.ndarray
    body: np.ndarray
    row_sum: np.ndarray


def _weights(w, n):
    if isinstance(w, SimplexWeights):
        if w.n != n:
            raise OutOfDomain("weights do not match the marginals")
        return w
    return SimplexWeights.from_array(np.asarray(w, dtype=float))


def _tail_share(beta):
    beta = np.asarray(beta, dtype=float)
    n = len(beta) - 1
    if beta[0] >= 1.0:
        return np.full(n, 1.0 / n)
    return np.clip(beta[1:] / (1.0 - beta[0]), 0.0, 1.0)


def _h_matrix(models, share, u):
    """Rows h_i(u) for every i, on the array of points u."""
    u = np.asarray(u, dtype=float)
    lower = np.array([m.ql(np.clip((1.0 - a) * u, U_FLOOR, 1.0)) for m, a in zip(models, share)])
    upper = np.array([m.ql(np.clip(1.0 - a * u, U_FLOOR, 1.0)) for m, a in zip(models, share)])
    with np.errstate(invalid="ignore"):
        total = lower.sum(axis=0)
        return upper + (total - lower)


def h_function(marginals, w, i: int, u):
    """h_i(u) for the branch i (0-based) under weights w."""
    models = as_models(marginals)
    w = _weights(w, len(models))
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0) or np.any(u_arr > 1):
        raise OutOfDomain("u must lie in (0, 1]")
    if not 0 <= i < len(models):
        raise OutOfDomain(f"branch index {i} out of range")
    share = _tail_share(w.beta)
    out = _h_matrix(models, share, np.atleast_1d(u_arr))[i]
    return float(out[0]) if np.ndim(u) == 0 else out


def _active(share):
    idx = np.flatnonzero(share > 0)
    return idx if len(idx) else np.arange(len(share))


def _branch_minima(models, share, right, refine=True, points=GRID_POINTS):
    """min over u in (0, right] of h_i for each active branch, with the argmins."""
    grid = np.linspace(0.0, right, points + 1)[1:]
    grid[0] = max(grid[0], U_FLOOR)
    H = _h_matrix(models, share, grid)
    mins, args = {}, {}
    for i in _active(share):
        row = np.where(np.isnan(H[i]), np.inf, H[i])
        k = int(np.argmin(row))
        best_u, best_v = grid[k], row[k]
        if refine and math.isfinite(best_v):
            lo = grid[k - 1] if k > 0 else U_FLOOR
            hi = grid[k + 1] if k + 1 < len(grid) else right
            if hi > lo:
                res = minimize_scalar(
                    lambda x: float(_h_matrix(models, share, np.array([x]))[i, 0]),
                    bounds=(lo, hi),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                if res.fun < best_v:
                    best_u, best_v = float(res.x), float(res.fun)
        mins[int(i)] = float(best_v)
        args[int(i)] = float(best_u)
    return mins, args


def _H(models, beta, refine=True, points=GRID_POINTS):
    share = _tail_share(beta)
    mins, _ = _branch_minima(models, share, 1.0, refine, points)
    return min(mins.values())


def build_candidate(marginals, w) -> DependenceStructure:
    models = as_models(marginals)
    w = _weights(w, len(models))
    b0 = w.beta[0]
    if b0 >= 1.0:
        raise DegenerateBeta("beta_0 = 1: the marginals are jointly mixable and no tail branches exist")
    share = _tail_share(w.beta)
    body = r_plus(models, w) if b0 > 0 else math.inf
    mins, _ = _branch_minima(models, share, 1.0 - b0)
    inf_value = min(body, min(mins.values()))
    return DependenceStructure(CANDIDATE, w, tuple(models), float(inf_value), float(body) if b0 > 0 else None)


def check_candidate_optimality(structure: DependenceStructure, tol: float = 1e-7) -> bool:
    """True when every h_i attains its minimum over (0, 1-beta_0] at the right end."""
    if structure.kind != CANDIDATE:
        raise OutOfDomain("optimality check applies to candidate structures")
    beta = np.asarray(structure.weights.beta)
    if beta[0] >= 1.0 or np.any(beta[1:] <= 0):
        return False
    models = list(structure.marginals)
    share = _tail_share(beta)
    right = 1.0 - beta[0]
    mins, _ = _branch_minima(models, share, right)
    end = _h_matrix(models, share, np.array([right]))[:, 0]
    return all(mins[i] >= end[i] - tol * (1.0 + abs(end[i])) for i in mins)


def first_order_gaps(marginals, w):
    """|h_i(1-beta_0) - R⁺_beta| for every i with beta_i > 0."""
    models = as_models(marginals)
    w = _weights(w, len(models))
    beta = np.asarray(w.beta)
    if beta[0] >= 1.0 or beta[0] <= 0.0:
        return {}
    share = _tail_share(beta)
    end = _h_matrix(models, share, np.array([1.0 - beta[0]]))[:, 0]
    target = r_plus(models, w)
    return {int(i): float(abs(end[i] - target)) for i in np.flatnonzero(beta[1:] > 0)}


def build_suboptimal_beta(marginals, w) -> DependenceStructure:
    models = as_models(marginals)
    w = _weights(w, len(models))
    return DependenceStructure(SUBOPTIMAL_BETA, w, tuple(models), float(_H(models, w.beta)))


def improve_suboptimal(marginals, opts: Optional[OptimizerOptions] = None):
    """Maximise H over the simplex; returns (gamma, H(gamma))."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    n = len(models)

    def evaluate(B):
        # coarse grid while searching; the reported value uses the full grid
        return np.array([_H(models, b, refine=False, points=512) for b in np.atleast_2d(B)])

    outcome = search(evaluate, n, 1.0, 0.0, -1, opts)
    gamma = SimplexWeights.from_array(outcome.beta)
    return gamma, float(_H(models, outcome.beta))


def build_suboptimal_gamma(marginals, opts: Optional[OptimizerOptions] = None) -> DependenceStructure:
    models = as_models(marginals)
    gamma, value = improve_suboptimal(models, opts)
    return DependenceStructure(SUBOPTIMAL_GAMMA, gamma, tuple(models), value)


def approximation_interval(marginals, t: float = 0.0, opts: Optional[OptimizerOptions] = None):
    """[H(gamma), convolution bound] for the worst-case q⁺_t of the sum."""
    models = as_models(marginals)
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise OutOfDomain(f"t={t} outside [0, 1)")
    tails = [tail_upper(m, t) for m in models] if t > 0 else models
    _, low = improve_suboptimal(tails, opts)
    high = upper_quantile_bound(models, t, opts).value
    if low > high + 1e-6 * (1.0 + abs(high)):
        raise AssertionError(f"approximation interval is inverted: {low} > {high}")
    return float(low), float(high)


def _uniform_body(models, beta):
    """Constant-sum coordinates for equal-length uniform middle slices, as a function of V."""
    n = len(models)
    if n < 2 or not all(isinstance(m, Uniform) for m in models):
        return None
    lo = np.array([m.ql(max(1.0 - beta[0] - b, U_FLOOR)) for m, b in zip(models, beta[1:])])
    hi = np.array([m.ql(1.0 - b) for m, b in zip(models, beta[1:])])
    length = hi - lo
    if np.ptp(length) > 1e-12 * (1.0 + abs(length).max()):
        return None

    def coords(v):
        z = np.empty((len(v), n))
        start = 0
        if n % 2:
            z[:, 0] = v
            z[:, 1] = 1.0 - np.mod(2.0 * v, 1.0)
            z[:, 2] = np.mod(v + 0.5, 1.0)
            start = 3
        for j in range(start, n, 2):
            z[:, j] = v
            z[:, j + 1] = 1.0 - v
        return lo + length * z

    return coords


def sample(structure: DependenceStructure, count: int, seed: int = 0, body: str = "auto") -> StructureSample:
    """Draw ``count`` rows from a structure.

    Body rows of a candidate carry only their constant sum (coordinates are
    NaN) unless the middle slices are uniforms of equal length; ``body =
    "coordinates"`` demands coordinates and raises otherwise.
    """
    if count < 0:
        raise OutOfDomain("count must be nonnegative")
    rng = np.random.Generator(np.random.Philox(seed))
    models = list(structure.marginals)
    n = len(models)
    beta = np.asarray(structure.weights.beta, dtype=float)
    share = structure.branch_probabilities()
    u = rng.random(count)
    k = rng.choice(n, size=count, p=share / share.sum())
    v = rng.random(count)
    if structure.kind == CANDIDATE:
        cut = 1.0 - beta[0]
        is_body = u >= cut
    else:
        cut = 1.0
        is_body = np.zeros(count, dtype=bool)
    X = np.full((count, n), np.nan)
    tail = ~is_body
    for i, m in enumerate(models):
        a = share[i]
        hit = tail & (k == i)
        miss = tail & (k != i)
        X[hit, i] = m.ql(np.clip(1.0 - a * u[hit], U_FLOOR, 1.0))
        X[miss, i] = m.ql(np.clip((1.0 - a) * u[miss], U_FLOOR, 1.0))
    if np.any(is_body):
        coords = _uniform_body(models, beta)
        if coords is not None:
            X[is_body] = coords(v[is_body])
        elif body == "coordinates":
            raise BodyNotConstructible("constant-sum body coordinates are only built for equal uniform slices")
    row_sum = X.sum(axis=1)
    if structure.body_sum is not None:
        row_sum[is_body] = structure.body_sum
    branch = np.where(is_body, 0, k + 1)
    return StructureSample(X, branch, is_body, row_sum)


def structure_for(kind: str, marginals, t: float = 0.0, opts: Optional[OptimizerOptions] = None) -> DependenceStructure:
    """Build a structure of the given kind from the level-t tails."""
    models = as_models(marginals)
    tails = [tail_upper(m, t) for m in models] if t > 0 else models
    key = kind.lower()
    if key in ("gamma", SUBOPTIMAL_GAMMA.lower()):
        return build_suboptimal_gamma(tails, opts)
    bound = upper_quantile_bound(tails, 0.0, opts, certify=False)
    if key in ("candidate", CANDIDATE.lower()):
        return build_candidate(tails, bound.weights)
    if key in ("beta", SUBOPTIMAL_BETA.lower()):
        return build_suboptimal_beta(tails, bound.weights)
    raise OutOfDomain(f"unknown structure kind {kind!r}")
