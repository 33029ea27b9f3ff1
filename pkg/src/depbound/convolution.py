"""Convolution bounds on worst- and best-case quantile and RVaR aggregation.

For marginals mu_1..mu_n and weights beta = (beta_0, ..., beta_n) on a scaled
simplex,

    R⁺_beta = sum_i R_{beta_i, beta_0}(mu_i)            (tail windows at the top)
    R⁻_beta = sum_i R_{1 - beta_i - beta_0, beta_0}(mu_i)  (windows at the bottom)

The worst-case q⁺_t of the sum is at most inf R⁺ over (1-t)Δ; the best-case
q⁻_t is at least sup R⁻ over tΔ.

At beta_0 = 0 the windows collapse to points. There the objective is extended
by its lower (for R⁺) or upper (for R⁻) limit from inside the simplex, which
equals the plain quantile sum when the quantiles are continuous. At a quantile
jump the limit picks the left or right value per marginal, and at least one
marginal must take the side that the collapsing window approaches from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._simplex import OptimizerOptions, search
from .distributions import QuantileModel, as_models, truncate_upper
from .exceptions import MeanUndefined, OptimizerFailed, OutOfDomain, UndefinedForm

UPPER_QUANTILE = "UpperQuantile"
LOWER_QUANTILE = "LowerQuantile"
UPPER_RVAR = "UpperRVaR"
LOWER_RVAR = "LowerRVaR"

NLE2 = "NLe2"
DECREASING_DENSITIES = "DecreasingDensities"
INCREASING_DENSITIES = "IncreasingDensities"
LOWER_MUTUAL_EXCLUSIVE = "LowerMutualExclusive"
UPPER_MUTUAL_EXCLUSIVE = "UpperMutualExclusive"
JOINTLY_MIXABLE = "JointlyMixable"
EXPECTED_SHORTFALL = "ExpectedShortfall"
NOT_CERTIFIED = "NotCertified"
UNCHECKED = "Unchecked"

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SimplexWeights:
    """Weights (beta_0, beta_1, ..., beta_n) with sum equal to ``budget`` and
    beta_0 >= ``floor``."""

    beta: tuple
    budget: float
    floor: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float).ravel()
        if b.size < 2:
            raise OutOfDomain("weights need beta_0 and at least one beta_i")
        if np.any(b < -_SUM_TOL) or not np.all(np.isfinite(b)):
            raise OutOfDomain(f"weights must be nonnegative, got {b.tolist()}")
        b = np.maximum(b, 0.0)
        if abs(b.sum() - self.budget) > _SUM_TOL * len(b) * max(1.0, self.budget):
            raise OutOfDomain(f"weights sum to {b.sum()!r}, expected budget {self.budget!r}")
        if b[0] < self.floor - _SUM_TOL:
            raise OutOfDomain(f"beta_0={b[0]} is below the window floor {self.floor}")
        object.__setattr__(self, "beta", tuple(b.tolist()))

    @classmethod
    def from_array(cls, beta, floor=0.0):
        beta = np.asarray(beta, dtype=float)
        return cls(tuple(beta.tolist()), float(beta.sum()), floor)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.beta)

    @property
    def n(self) -> int:
        return len(self.beta) - 1

    @property
    def beta0(self) -> float:
        return self.beta[0]


@dataclass(frozen=True)
class BoundResult:
    value: float
    weights: SimplexWeights
    direction: str
    sharpness: str
    evaluations: int
    converged: bool
    level: float = 0.0
    window: Optional[float] = None
    notes: tuple = field(default=())

    @property
    def beta(self):
        return self.weights.beta

    def to_dict(self) -> dict:
        out = {
            "value": _json_number(self.value),
            "beta": list(self.weights.beta),
            "direction": self.direction,
            "level": self.level,
            "sharpness": self.sharpness,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }
        if self.window is not None:
            out["window"] = self.window
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _json_number(x):
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


# objective evaluation ----------------------------------------------------------

_THIN = 1e-10


def _upper_boundary(models, b):
    total = 0.0
    forced = False
    jumps = []
    for m, bi in zip(models, b):
        p = 1.0 - bi
        if bi <= 0.0:
            total += m.ql(1.0)
        elif p <= 0.0:
            total += m.qr(0.0)
            forced = True
        else:
            left = m.ql(p)
            total += left
            jumps.append(m.qr(p) - left)
    if not forced and jumps:
        total += min(jumps)
    return total


def _lower_boundary(models, b):
    total = 0.0
    forced = False
    jumps = []
    for m, bi in zip(models, b):
        if bi <= 0.0:
            total += m.qr(0.0)
        elif bi >= 1.0:
            total += m.ql(1.0)
            forced = True
        else:
            right = m.qr(bi)
            total += right
            jumps.append(right - m.ql(bi))
    if not forced and jumps:
        total -= min(jumps)
    return total


def _values(models, B, upper):
    B = np.atleast_2d(np.asarray(B, dtype=float))
    b0 = B[:, 0]
    out = np.zeros(len(B))
    # narrower windows lose the average to cancellation; use the limit there
    inner = b0 > _THIN
    if np.any(inner):
        w = b0[inner]
        with np.errstate(invalid="ignore"):
            for i, m in enumerate(models):
                bi = B[inner, i + 1]
                if upper:
                    hi = np.clip(1.0 - bi, 0.0, 1.0)
                    lo = np.maximum(hi - w, 0.0)
                else:
                    lo = np.clip(bi, 0.0, 1.0)
                    hi = np.minimum(lo + w, 1.0)
                out[inner] += m.integral(lo, hi) / w
    boundary = _upper_boundary if upper else _lower_boundary
    with np.errstate(invalid="ignore"):
        for r in np.flatnonzero(~inner):
            out[r] = boundary(models, B[r, 1:])
    return out


def upper_objective(models, B):
    """R⁺ for each row of B; NaN where an infinity minus infinity arises."""
    return _values(models, B, upper=True)


def lower_objective(models, B):
    """R⁻ for each row of B; NaN where an infinity minus infinity arises."""
    return _values(models, B, upper=False)


def _weights(w, n):
    if not isinstance(w, SimplexWeights):
        w = SimplexWeights.from_array(w)
    if w.n != n:
        raise OutOfDomain(f"weights have {w.n} tail entries for {n} marginals")
    return w


def _plain_boundary(models, b, upper):
    """Pure quantile sums at beta_0 = 0: sum q⁻_{1-beta_i} (upper) or sum q⁺_{beta_i} (lower)."""
    total = 0.0
    with np.errstate(invalid="ignore"):
        for m, bi in zip(models, b):
            if upper:
                total += m.ql(1.0 - bi) if bi < 1.0 else m.qr(0.0)
            else:
                total += m.qr(bi) if bi < 1.0 else m.ql(1.0)
    return total


def _literal(models, w, upper):
    if w.beta[0] > _THIN:
        return float(_values(models, w.array[None, :], upper)[0])
    return float(_plain_boundary(models, w.beta[1:], upper))


def r_plus(marginals: Sequence[QuantileModel], w) -> float:
    """R⁺_beta(mu) = sum_i R_{beta_i, beta_0}(mu_i); at beta_0 = 0 the pure sum of q⁻_{1-beta_i}.

    The bound optimisers use the limit from inside the simplex instead, which
    differs from the pure sum only where a quantile jumps.
    """
    models = as_models(marginals)
    w = _weights(w, len(models))
    value = _literal(models, w, True)
    if math.isnan(value):
        raise UndefinedForm(f"R⁺ at beta={w.beta} combines +inf and -inf")
    return value


def r_minus(marginals: Sequence[QuantileModel], w) -> float:
    """R⁻_beta(mu) = sum_i R_{1-beta_i-beta_0, beta_0}(mu_i); at beta_0 = 0 the pure sum of q⁺_{beta_i}."""
    models = as_models(marginals)
    w = _weights(w, len(models))
    value = _literal(models, w, False)
    if math.isnan(value):
        raise UndefinedForm(f"R⁻ at beta={w.beta} combines +inf and -inf")
    return value


# optimisation -----------------------------------------------------------------


def _grid_units(models, budget):
    """Atom lattice size: the lcm of atom counts when every discrete marginal
    is equally weighted and the budget sits on that lattice."""
    counts = [m.atom_count for m in models if m.breakpoints() is not None]
    if not counts or any(c is None for c in counts):
        return None
    lcm = reduce(math.lcm, counts, 1)
    units = budget * lcm
    if abs(units - round(units)) > 1e-9 or round(units) < 1:
        return None
    return int(round(units))


def _run(models, budget, floor, upper, opts):
    objective = upper_objective if upper else lower_objective
    n = len(models)
    units = _grid_units(models, budget - floor)
    outcome = search(
        lambda B: objective(models, B),
        n,
        budget,
        floor,
        1 if upper else -1,
        opts,
        grid_units=units,
    )
    if math.isnan(outcome.value):
        raise UndefinedForm("the objective is undefined on every evaluated point of the feasible set")
    beta = outcome.beta.copy()
    beta[0] = budget - beta[1:].sum()
    if beta[0] < floor:
        beta[0] = floor
    return SimplexWeights(tuple(beta.tolist()), budget, floor), outcome


def _check_level(name, t, lo_open=False, hi_open=False):
    t = float(t)
    if math.isnan(t) or not (0.0 <= t <= 1.0) or (lo_open and t == 0.0) or (hi_open and t == 1.0):
        raise OutOfDomain(f"{name}={t} is outside its allowed range")
    return t


def _truncation_cap(models, t):
    """Cap for the truncation reduction of nonnegative infinite-mean marginals."""
    if not all(m.support[0] >= 0.0 for m in models):
        return None
    if all(m.mean_finite for m in models):
        return None
    n = len(models)
    return float(sum(m.qr(1.0 - (1.0 - t) / n) for m in models))


def upper_quantile_bound(
    marginals,
    t: float = 0.0,
    opts: Optional[OptimizerOptions] = None,
    truncate: bool = True,
    certify: bool = True,
) -> BoundResult:
    """inf of R⁺ over (1-t)Δ, an upper bound on sup q⁺_t of the sum."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    t = _check_level("t", t, hi_open=True)
    notes = []
    work = models
    if truncate:
        cap = _truncation_cap(models, t)
        if cap is not None:
            work = [truncate_upper(m, cap) for m in models]
            notes.append(f"truncated at {cap!r}")
    weights, outcome = _run(work, 1.0 - t, 0.0, True, opts)
    cert = sharpness_certificate(models, t, UPPER_QUANTILE, value=outcome.value, opts=opts) if certify else UNCHECKED
    return BoundResult(outcome.value, weights, UPPER_QUANTILE, cert, outcome.evaluations, outcome.converged, t, None, tuple(notes))


def lower_quantile_bound(
    marginals, t: float = 1.0, opts: Optional[OptimizerOptions] = None, certify: bool = True
) -> BoundResult:
    """sup of R⁻ over tΔ, a lower bound on inf q⁻_t of the sum."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    t = _check_level("t", t, lo_open=True)
    weights, outcome = _run(models, t, 0.0, False, opts)
    cert = sharpness_certificate(models, t, LOWER_QUANTILE, value=outcome.value, opts=opts) if certify else UNCHECKED
    return BoundResult(outcome.value, weights, LOWER_QUANTILE, cert, outcome.evaluations, outcome.converged, t)


def upper_rvar_bound(marginals, t: float, s: float, opts: Optional[OptimizerOptions] = None) -> BoundResult:
    """Upper bound on the worst-case average quantile of the sum over the
    window [1-t-s, 1-t]: inf of R⁺ over (t+s)Δ with beta_0 >= s."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    t, s = _check_window(t, s)
    weights, outcome = _run(models, t + s, s, True, opts)
    cert = sharpness_certificate(models, t, UPPER_RVAR, window=s)
    return BoundResult(outcome.value, weights, UPPER_RVAR, cert, outcome.evaluations, outcome.converged, t, s)


def lower_rvar_bound(marginals, t: float, s: float, opts: Optional[OptimizerOptions] = None) -> BoundResult:
    """Lower bound on the best-case average quantile of the sum over the
    window [1-t-s, 1-t]: sup of R⁻ over (1-t)Δ with beta_0 >= s."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    t, s = _check_window(t, s)
    weights, outcome = _run(models, 1.0 - t, s, False, opts)
    cert = sharpness_certificate(models, t, LOWER_RVAR, window=s)
    return BoundResult(outcome.value, weights, LOWER_RVAR, cert, outcome.evaluations, outcome.converged, t, s)


def _check_window(t, s):
    t, s = float(t), float(s)
    if not (s > 0.0 and 0.0 <= t and t + s <= 1.0 + 1e-15):
        raise OutOfDomain(f"need s > 0 and 0 <= t < t+s <= 1, got t={t}, s={s}")
    return t, min(s, 1.0 - t)


# reduced (homogeneous) bounds --------------------------------------------------


def _reduced_values(model, n, t, alphas, upper):
    alphas = np.asarray(alphas, dtype=float)
    if upper:
        width = 1.0 - t - n * alphas
        lo, hi = t + (n - 1) * alphas, 1.0 - alphas
    else:
        width = t - n * alphas
        lo, hi = alphas, t - (n - 1) * alphas
    out = np.empty(alphas.shape)
    inner = width > 1e-15
    with np.errstate(invalid="ignore"):
        out[inner] = n * model.integral(lo[inner], hi[inner]) / width[inner]
    models = [model] * n
    boundary = _upper_boundary if upper else _lower_boundary
    for r in np.flatnonzero(~inner):
        out[r] = boundary(models, np.full(n, alphas[r]))
    return out


def _reduced(model, n, t, upper, grid=256):
    top = ((1.0 - t) if upper else t) / n
    sense = 1.0 if upper else -1.0
    alphas = np.linspace(0.0, top, grid + 1)
    vals = _reduced_values(model, n, t, alphas, upper)
    scores = np.where(np.isnan(vals), np.inf, sense * vals)
    k = int(np.argmin(scores))
    best_a, best_v = alphas[k], vals[k]
    lo, hi = alphas[max(k - 1, 0)], alphas[min(k + 1, grid)]
    if hi > lo and np.isfinite(scores[k]):
        res = minimize_scalar(
            lambda a: float(sense * _reduced_values(model, n, t, np.array([a]), upper)[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(top, 1e-300)},
        )
        if np.isfinite(res.fun) and res.fun < sense * best_v:
            best_a, best_v = float(res.x), float(sense * res.fun)
    return float(best_v), float(best_a)


def reduced_upper_bound(model: QuantileModel, n: int, t: float = 0.0):
    """inf over a in (0, (1-t)/n) of n/(1-t-na) * integral of q over [t+(n-1)a, 1-a].

    Returns ``(value, alpha)``. This is the full bound restricted to equal tail
    weights, so it is never below :func:`upper_quantile_bound` for n copies.
    """
    t = _check_level("t", t, hi_open=True)
    if n < 1:
        raise OutOfDomain("n must be at least 1")
    if n == 1:
        # the window shrinks onto t at the end of the range
        return float(model.qr(t)), 1.0 - t
    return _reduced(model, int(n), t, upper=True)


def reduced_lower_bound(model: QuantileModel, n: int, t: float = 1.0):
    """sup over a in (0, t/n) of n/(t-na) * integral of q over [a, t-(n-1)a]."""
    t = _check_level("t", t, lo_open=True)
    if n < 1:
        raise OutOfDomain("n must be at least 1")
    if n == 1:
        return float(model.ql(t)), t
    return _reduced(model, int(n), t, upper=False)


# certificates -----------------------------------------------------------------


def _mass(model, a, b, left_closed, right_closed):
    """mu of the interval between a and b with the given endpoint closures."""
    upper = model.cdf(b) if right_closed else model.cdf_left(b)
    lower = model.cdf_left(a) if left_closed else model.cdf(a)
    return max(0.0, float(upper) - float(lower))


def sharpness_certificate(marginals, t, direction, window=None, value=None, opts=None) -> str:
    """Name a sufficient condition under which the bound is known to be sharp.

    ``value`` (the bound, when already computed) lets the joint-mixability
    check skip work when the bound is away from the mean sum.
    """
    models = as_models(marginals)
    n = len(models)
    if n <= 2:
        return NLE2
    shapes = [m.shape for m in models]
    tol = 1e-12
    if direction == UPPER_QUANTILE:
        if all(s.decreasing_beyond(t) for s in shapes):
            return DECREASING_DENSITIES
        if all(s.increasing_below(1.0) for s in shapes):
            return INCREASING_DENSITIES
        lo = [m.qr(t) for m in models]
        hi = [m.ql(1.0) for m in models]
        if sum(_mass(m, a, b, False, True) for m, a, b in zip(models, lo, hi)) <= 1.0 - t + tol:
            return LOWER_MUTUAL_EXCLUSIVE
        if sum(_mass(m, a, b, True, False) for m, a, b in zip(models, lo, hi)) <= 1.0 - t + tol:
            return UPPER_MUTUAL_EXCLUSIVE
        if t == 0.0 and _jointly_mixable(models, value, opts):
            return JOINTLY_MIXABLE
        return NOT_CERTIFIED
    if direction == LOWER_QUANTILE:
        if all(s.increasing_below(t) for s in shapes):
            return INCREASING_DENSITIES
        if all(s.decreasing_beyond(0.0) for s in shapes):
            return DECREASING_DENSITIES
        lo = [m.qr(0.0) for m in models]
        hi = [m.ql(t) for m in models]
        if sum(_mass(m, a, b, True, False) for m, a, b in zip(models, lo, hi)) <= t + tol:
            return UPPER_MUTUAL_EXCLUSIVE
        if sum(_mass(m, a, b, False, True) for m, a, b in zip(models, lo, hi)) <= t + tol:
            return LOWER_MUTUAL_EXCLUSIVE
        if t == 1.0 and _jointly_mixable(models, value, opts):
            return JOINTLY_MIXABLE
        return NOT_CERTIFIED
    if direction == UPPER_RVAR:
        s = float(window)
        if t == 0.0:
            return EXPECTED_SHORTFALL
        level = 1.0 - t - s
        if all(sh.decreasing_beyond(level) for sh in shapes):
            return DECREASING_DENSITIES
        if sum(_mass(m, m.qr(level), m.ql(1.0), False, True) for m in models) <= t + s + tol:
            return LOWER_MUTUAL_EXCLUSIVE
        return NOT_CERTIFIED
    if direction == LOWER_RVAR:
        s = float(window)
        if abs(t + s - 1.0) <= tol:
            return EXPECTED_SHORTFALL
        level = 1.0 - t
        if all(sh.increasing_below(level) for sh in shapes):
            return INCREASING_DENSITIES
        if sum(_mass(m, m.qr(0.0), m.ql(level), True, False) for m in models) <= level + tol:
            return UPPER_MUTUAL_EXCLUSIVE
        return NOT_CERTIFIED
    raise OutOfDomain(f"unknown direction {direction!r}")


def _jointly_mixable(models, value, opts):
    from .mixability import JM, jm_check_finite_mean

    if not all(m.mean_finite for m in models):
        return False
    total = sum(m.mean() for m in models)
    if value is not None and abs(value - total) > 1e-5 * (1.0 + abs(total)):
        return False
    return jm_check_finite_mean(models, opts) == JM


def mean_sandwich(marginals, opts: Optional[OptimizerOptions] = None):
    """(sup R⁻ at level 1, sum of means, inf R⁺ at level 0).

    For finite means the chain lower >= mean_sum >= upper always holds.
    """
    models = as_models(marginals)
    for m in models:
        if not m.mean_finite:
            raise MeanUndefined(f"{m!r} has no finite mean")
    total = float(sum(m.mean() for m in models))
    lower = lower_quantile_bound(models, 1.0, opts).value
    upper = upper_quantile_bound(models, 0.0, opts).value
    tol = 1e-6 * (1.0 + abs(total))
    if not (lower >= total - tol and total >= upper - tol):
        raise OptimizerFailed(f"mean chain violated: {lower} >= {total} >= {upper} fails")
    return lower, total, upper
