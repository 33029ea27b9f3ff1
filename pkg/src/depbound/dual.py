"""Dual bounds, expressed through survival integrals instead of quantiles.

    D_n(x) = inf over r with sum(r) < x of  sum_i 1/(x - sum r) * ∫_{r_i}^{x - sum r + r_i} S_i(y) dy

with S_i(y) = mu_i(y, inf). The worst-case q⁺_t of the sum is at most
D_n^{-1}(1-t) = inf{x : D_n(x) < 1-t}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ._simplex import OptimizerOptions, compositions
from .distributions import QuantileModel, as_models
from .exceptions import BracketFailed, DiscontinuousMarginal, NonFiniteIntegrand, OutOfDomain


@dataclass(frozen=True)
class DualEvaluation:
    x: float
    value: float
    r: tuple

    def to_dict(self):
        return {"x": self.x, "value": self.value, "r": list(self.r)}


@dataclass(frozen=True)
class DualResult:
    value: float
    r: tuple
    level: float
    iterations: int
    bracket: tuple

    def to_dict(self):
        return {"value": self.value, "r": list(self.r), "level": self.level, "iterations": self.iterations}


def survival_integral(model: QuantileModel, a, b, width=None):
    """∫_a^b mu(y, inf) dy for a <= b, through the quantile integral.

    The parts of the window below and above the support are handled exactly
    so that far-away windows do not cancel catastrophically. Passing
    ``width = b - a`` avoids recomputing it from two large endpoints.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = b - a if width is None else np.asarray(width, dtype=float)
    low, high = model.qr(0.0), model.ql(1.0)
    below = np.clip(low - a, 0.0, width) if math.isfinite(low) else 0.0
    a = np.clip(a, low, high)
    b = np.clip(b, low, high)
    fa = np.asarray(model.cdf(a), dtype=float)
    fb = np.asarray(model.cdf(b), dtype=float)
    body = np.asarray(model.integral(fa, fb), dtype=float)
    with np.errstate(invalid="ignore"):
        tail_b = np.where(fb < 1.0, b * (1.0 - fb), 0.0)
        tail_a = np.where(fa < 1.0, a * (1.0 - fa), 0.0)
    out = below + body + tail_b - tail_a
    if not np.all(np.isfinite(out)):
        raise NonFiniteIntegrand("survival integral is not finite over the window")
    return out


_POLISHED = 2


def _window_average(models, r, x, s=None):
    """Average survival mass over the windows [r_i, r_i + s], s = x - sum(r)."""
    s = x - r.sum() if s is None else s
    if s <= 0:
        return math.inf
    return float(sum(survival_integral(m, ri, ri + s, s) for m, ri in zip(models, r)) / s)


def _spread(model):
    lo, hi = model.ql(np.array([0.1, 0.9]))
    return max(float(hi - lo), 1e-8)


def _starts(models, x):
    """Windows placed at the quantile levels of a small lattice of tail weights."""
    n = len(models)
    shares = compositions(4, n) / 4.0 if n <= 4 else np.full((1, n), 1.0 / n)
    starts = []
    for b0 in (0.9, 0.6, 0.3, 0.1):
        for w in shares:
            level = (1.0 - b0) * (1.0 - w)
            r = np.array([m.qr(u) for m, u in zip(models, level)])
            if np.all(np.isfinite(r)) and r.sum() < x:
                starts.append(r)
    if not starts:
        base = np.array([m.ql(0.5) for m in models])
        shift = (base.sum() - x) / n + 1.0
        starts.append(base - shift)
    return starts


def d_n(marginals, x: float, opts: Optional[OptimizerOptions] = None, start=None) -> DualEvaluation:
    """Evaluate D_n(x) with its inner minimiser r."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    x = float(x)
    top = sum(m.ql(1.0) for m in models)
    n = len(models)
    if x >= top:
        r = tuple(m.ql(1.0) - (top - x) / n for m in models) if math.isfinite(top) else tuple([math.nan] * n)
        return DualEvaluation(x, 0.0, r)

    if n == 1:
        # the infimum is the left limit of the survival function at x
        return DualEvaluation(x, float(1.0 - models[0].cdf_left(x)), (x,))

    scales = np.array([_spread(m) for m in models])
    lows = np.array([m.qr(0.0) if math.isfinite(m.qr(0.0)) else m.ql(1e-9) for m in models])
    reach = abs(x) + np.sum(np.abs(lows) + scales)
    box_lo, box_hi = lows - reach, np.full(n, reach)

    # coordinates (log s, r_1, ..., r_{n-1}) with r_n = x - s - sum of the others,
    # so the window width s stays exact even when the r_i are large
    def decode(z):
        width = math.exp(min(z[0], 700.0))
        head = np.clip(z[1:] * scales[:-1], box_lo[:-1], box_hi[:-1])
        last = x - width - head.sum()
        return width, np.append(head, last)

    def objective(z):
        width, r = decode(z)
        if not box_lo[-1] <= r[-1] <= box_hi[-1]:
            return math.inf
        return _window_average(models, r, x, width)

    def encode(r):
        return np.concatenate(([math.log(x - r.sum())], r[:-1] / scales[:-1]))

    candidates = [np.asarray(start, dtype=float)] if start is not None else []
    candidates += _starts(models, x)
    candidates = [np.clip(c, box_lo, box_hi) for c in candidates]
    candidates = [c for c in candidates if c.sum() < x] or _starts(models, x)
    vals = [_window_average(models, c, x) for c in candidates]
    best = candidates[int(np.argmin(vals))]
    best_val = min(vals)
    steps = np.concatenate(([0.5], np.full(n - 1, 0.25)))
    for k in np.argsort(vals, kind="stable")[:_POLISHED]:
        z0 = encode(candidates[k])
        for _ in range(3):
            simplex = np.vstack([z0, z0 + np.diag(steps)])
            res = minimize(
                objective,
                z0,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": 4000, "adaptive": n > 3, "initial_simplex": simplex},
            )
            if res.fun < best_val - 1e-14:
                best, best_val = decode(res.x)[1], float(res.fun)
            if res.fun >= objective(z0) - 1e-14:
                break
            z0 = res.x
    return DualEvaluation(x, float(min(max(best_val, 0.0), n)), tuple(best.tolist()))


def _invert(evaluate, alpha, lo, hi, tol, max_iter=200, margin=1e-10):
    """inf{x : D(x) < alpha} for nonincreasing D by bisection on [lo, hi].

    D is often flat at exactly alpha (e.g. alpha = 1 along degenerate windows),
    so "below alpha" means below alpha - margin.
    """
    alpha = alpha - margin
    step = max(abs(hi - lo), 1.0) if math.isfinite(hi) else max(abs(lo), 1.0)
    for _ in range(80):
        if evaluate(lo)[0] >= alpha:
            break
        lo -= step
        step *= 2.0
    else:
        raise BracketFailed("could not find a point with D(x) >= alpha")
    step = max(abs(hi - lo), 1.0) if math.isfinite(hi) else max(abs(lo), 1.0)
    for _ in range(80):
        if math.isfinite(hi) and evaluate(hi)[0] < alpha:
            break
        hi = (hi if math.isfinite(hi) else lo) + step
        step *= 2.0
    else:
        raise BracketFailed("could not find a point with D(x) < alpha")
    bracket = (lo, hi)
    tol = tol * (1.0 + abs(hi - lo))
    it = 0
    last_r = evaluate(hi)[1]
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        val, r = evaluate(mid)
        if val < alpha:
            hi, last_r = mid, r
        else:
            lo = mid
        it += 1
    return hi, last_r, it, bracket


def dual_bound(marginals, t: float = 0.0, opts: Optional[OptimizerOptions] = None, start=None) -> DualResult:
    """D_n^{-1}(1-t), an upper bound on the worst-case q⁺_t of the sum."""
    opts = opts or OptimizerOptions()
    models = as_models(marginals)
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise OutOfDomain(f"t={t} outside [0, 1)")
    alpha = 1.0 - t
    lo = float(sum(m.qr(t) for m in models))
    hi = float(sum(m.ql(1.0) for m in models))
    if not math.isfinite(lo):
        raise BracketFailed("comonotone quantile sum is not finite at this level")
    warm = [start]

    def evaluate(x):
        ev = d_n(models, x, opts, start=warm[0])
        if all(math.isfinite(v) for v in ev.r):
            warm[0] = np.array(ev.r)
        return ev.value, ev.r

    lo -= 1e-9 * (1.0 + abs(lo))
    x, r, it, bracket = _invert(evaluate, alpha, lo, hi if math.isfinite(hi) else math.inf, opts.tol * 10)
    return DualResult(float(x), tuple(r), t, it, bracket)


def _reduced_value(model, n, x, a):
    width = x - n * a
    if width <= 0:
        return math.inf
    return float(n * survival_integral(model, a, x - (n - 1) * a) / width)


def reduced_d(model: QuantileModel, n: int, x: float):
    """D(x) = inf over a < x/n of n/(x - na) ∫_a^{x-(n-1)a} S(y) dy, with its minimiser."""
    x = float(x)
    top = n * model.ql(1.0)
    if x >= top:
        return 0.0, x / n
    low = model.qr(0.0)
    if not math.isfinite(low):
        low = model.ql(1e-9)
    a_hi = x / n
    a_lo = min(low, a_hi) - max(_spread(model), abs(a_hi - low))
    grid = np.linspace(a_lo, a_hi, 257)[:-1]
    vals = np.array([_reduced_value(model, n, x, a) for a in grid])
    k = int(np.argmin(vals))
    best_a, best_v = grid[k], vals[k]
    lo_b = grid[max(k - 1, 0)]
    hi_b = grid[k + 1] if k + 1 < len(grid) else a_hi
    res = minimize_scalar(
        lambda a: _reduced_value(model, n, x, a), bounds=(lo_b, hi_b), method="bounded", options={"xatol": 1e-12 * (1 + abs(a_hi))}
    )
    if res.fun < best_v:
        best_a, best_v = float(res.x), float(res.fun)
    return float(min(max(best_v, 0.0), n)), float(best_a)


def reduced_dual_bound(model: QuantileModel, n: int, t: float = 0.0, opts: Optional[OptimizerOptions] = None) -> float:
    """Inverse of the reduced dual function at 1-t."""
    opts = opts or OptimizerOptions()
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise OutOfDomain(f"t={t} outside [0, 1)")
    if n < 1:
        raise OutOfDomain("n must be at least 1")
    lo = n * model.qr(t)
    hi = n * model.ql(1.0)
    lo -= 1e-9 * (1.0 + abs(lo))

    def evaluate(x):
        return reduced_d(model, n, x)

    x, _, _, _ = _invert(evaluate, 1.0 - t, lo, hi if math.isfinite(hi) else math.inf, opts.tol * 10)
    return float(x)


@dataclass(frozen=True)
class Correspondence:
    r: tuple
    residuals: tuple

    def to_dict(self):
        return {"r": list(self.r), "residuals": list(self.residuals)}


def correspondence(marginals: Sequence[QuantileModel], beta, x: float, tol: float = 1e-9) -> Correspondence:
    """Map convolution weights to dual variables: F_i(r_i) = 1 - beta_0 - beta_i.

    The residuals are |F_i(x - sum r + r_i) - (1 - beta_i)|, which vanish when
    ``beta`` is optimal and ``x`` is the common bound value.
    """
    models = as_models(marginals)
    beta = np.asarray(getattr(beta, "beta", beta), dtype=float)
    if len(beta) != len(models) + 1:
        raise OutOfDomain("weights do not match the marginals")
    b0 = beta[0]
    levels = 1.0 - b0 - beta[1:]
    r = []
    for m, p in zip(models, levels):
        if not m.continuous:
            raise DiscontinuousMarginal(f"{m!r} has quantile jumps; the correspondence needs continuous laws")
        p = min(max(p, 0.0), 1.0)
        ri = m.qr(p) if p < 1.0 else m.ql(1.0)
        if p > 0.0 and abs(m.qr(p) - m.ql(p)) > tol * (1.0 + abs(ri)):
            raise DiscontinuousMarginal(f"quantile of {m!r} jumps at level {p}")
        r.append(float(ri))
    r = np.array(r)
    s = x - r.sum()
    res = [abs(float(m.cdf(ri + s)) - (1.0 - bi)) for m, ri, bi in zip(models, r, beta[1:])]
    return Correspondence(tuple(r.tolist()), tuple(res))
