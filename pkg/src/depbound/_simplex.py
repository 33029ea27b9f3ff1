"""Derivative-free search over the scaled simplex {beta >= 0, sum beta = budget, beta_0 >= floor}.

Search state is the vector of free coordinates x = (beta_1, ..., beta_n); the
body weight beta_0 = budget - sum(x) is implied. Feasibility is restored by
Euclidean projection before every evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc


@dataclass(frozen=True)
class OptimizerOptions:
    grid_res: int = 12
    lhs_points: int = 64
    max_evals: int = 10_000
    tol: float = 1e-9
    seed: int = 0
    starts: int = 3
    max_lattice: int = 200_000


@dataclass
class SearchOutcome:
    beta: np.ndarray
    value: float
    evaluations: int
    converged: bool


def project_capped_simplex(x, cap):
    """Euclidean projection onto {x >= 0, sum(x) <= cap}."""
    y = np.maximum(x, 0.0)
    if y.sum() <= cap:
        return y
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - cap
    idx = np.arange(1, len(x) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


def compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    rows = []
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, parts)


def _composition_count(total, parts):
    return math.comb(total + parts - 1, parts - 1)


def _snap_rows(weights, units):
    """Round rows of nonnegative weights summing to ``units`` onto integers,
    keeping the row sum (largest remainder)."""
    raw = weights * units
    base = np.floor(raw)
    short = (units - base.sum(axis=1)).astype(int)
    frac = raw - base
    for r in range(len(base)):
        order = np.lexsort((np.arange(frac.shape[1]), -frac[r]))
        base[r, order[: short[r]]] += 1
    return base


def seed_points(n, budget, floor, opts: OptimizerOptions, grid_units: Optional[int]) -> np.ndarray:
    """Starting points as rows (beta_0, ..., beta_n)."""
    free = budget - floor
    if free <= 0:
        return np.array([[budget] + [0.0] * n])
    pts = []
    if n <= 3:
        pts.append(compositions(opts.grid_res, n + 1) / opts.grid_res * free)
    if grid_units is not None and _composition_count(grid_units, n + 1) <= opts.max_lattice:
        pts.append(compositions(grid_units, n + 1) / grid_units * free)
    if n > 3 or not pts:
        sampler = qmc.LatinHypercube(d=n + 1, seed=np.random.default_rng(opts.seed))
        u = np.clip(sampler.random(opts.lhs_points), 1e-12, 1.0)
        w = -np.log(u)
        w /= w.sum(axis=1, keepdims=True)
        extra = [np.eye(n + 1)[0], np.full(n + 1, 1.0 / (n + 1))]
        for c in (0.25, 0.5, 0.75):
            extra.append(np.r_[c, np.full(n, (1.0 - c) / n)])
        extra.append(np.r_[0.0, np.full(n, 1.0 / n)])
        w = np.vstack([w, extra])
        if grid_units is not None:
            w = _snap_rows(w, grid_units) / grid_units
        pts.append(w * free)
    pts = np.vstack(pts)
    pts[:, 0] += floor
    return np.unique(pts, axis=0)


def search(
    evaluate: Callable[[np.ndarray], np.ndarray],
    n: int,
    budget: float,
    floor: float,
    sense: int,
    opts: OptimizerOptions,
    grid_units: Optional[int] = None,
) -> SearchOutcome:
    """Minimise (sense=+1) or maximise (sense=-1) ``evaluate`` over the simplex.

    ``evaluate`` maps an (N, n+1) array of weights to N values; NaN marks an
    undefined point and is treated as the worst possible value.
    """
    free = budget - floor
    count = 0

    def score(values):
        s = sense * np.asarray(values, dtype=float)
        return np.where(np.isnan(s), np.inf, s)

    seeds = seed_points(n, budget, floor, opts, grid_units)
    raw = evaluate(seeds)
    count += len(seeds)
    if np.all(np.isnan(raw)):
        return SearchOutcome(seeds[0], math.nan, count, False)
    scores = score(raw)

    best_score = scores.min()
    best_tol = 1e-12 * (1.0 + abs(best_score)) if math.isfinite(best_score) else 0.0
    tied = np.flatnonzero(scores <= best_score + best_tol)
    pick = tied[np.lexsort(seeds[tied].T[::-1])[0]]
    best_beta = seeds[pick].copy()
    best_val = float(raw[pick])

    if free <= 0 or n == 0:
        return SearchOutcome(best_beta, best_val, count, True)

    order = np.lexsort(tuple(seeds.T[::-1]) + (scores,))
    starts = []
    for idx in order:
        if not np.isfinite(scores[idx]):
            break
        if all(np.max(np.abs(seeds[idx] - seeds[j])) > 1e-12 for j in starts):
            starts.append(idx)
        if len(starts) >= opts.starts:
            break

    def to_beta(x):
        y = project_capped_simplex(np.asarray(x, dtype=float), free)
        return np.r_[budget - y.sum(), y]

    nm_best = (np.inf, None)
    converged = True
    step0 = free / (2.0 * max(opts.grid_res, 2))

    for idx in starts:
        x0 = seeds[idx][1:].copy()
        step = step0
        for _ in range(4):
            remaining = opts.max_evals - count
            if remaining <= n + 1:
                converged = False
                break
            simplex = [x0]
            for j in range(n):
                v = x0.copy()
                if v.sum() + step <= free:
                    v[j] += step
                elif v[j] >= step:
                    v[j] -= step
                else:
                    v[j] += step
                simplex.append(v)
            calls = [0]

            def fun(x):
                calls[0] += 1
                beta = to_beta(x)
                return float(score(evaluate(beta[None, :]))[0])

            res = minimize(
                fun,
                x0,
                method="Nelder-Mead",
                options={
                    "initial_simplex": np.array(simplex),
                    "xatol": opts.tol,
                    "fatol": opts.tol,
                    "maxfev": remaining,
                    "adaptive": n > 3,
                },
            )
            count += calls[0]
            if res.status != 0:
                converged = False
            improved = res.fun < nm_best[0] - opts.tol
            if res.fun < nm_best[0]:
                nm_best = (float(res.fun), to_beta(res.x))
            if not improved and step < step0:
                break
            x0 = to_beta(res.x)[1:]
            step = max(step / 8.0, 1e3 * opts.tol)

    if nm_best[1] is not None:
        cand = nm_best[1]
        cand_val = float(evaluate(cand[None, :])[0])
        count += 1
        cand_score = float(score(np.array([cand_val]))[0])
        if cand_score < float(score(np.array([best_val]))[0]) - 1e-12 * (1.0 + abs(cand_score)):
            best_beta, best_val = cand, cand_val
    return SearchOutcome(best_beta, best_val, count, converged)
