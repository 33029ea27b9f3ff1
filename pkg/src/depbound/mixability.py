"""Joint-mixability diagnostics.

A tuple of marginals is jointly mixable (JM) when some coupling has an almost
surely constant sum, the center. Every center lies in [sup R⁻, inf R⁺]; for
finite means the only candidate is the mean sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .convolution import lower_quantile_bound, upper_quantile_bound
from .distributions import Cauchy, Normal, as_models
from .exceptions import MeanUndefined, OutOfDomain

JM = "JM"
NOT_JM = "NotJM"
INCONCLUSIVE = "Inconclusive"

_SYMMETRIC_FAMILIES = (Normal, Cauchy)


@dataclass(frozen=True)
class CenterInterval:
    low: float
    high: float

    @property
    def nonempty(self) -> bool:
        return self.low <= self.high

    def to_dict(self):
        return {"low": self.low, "high": self.high, "nonempty": self.nonempty}


@dataclass(frozen=True)
class JMReport:
    verdict: str
    center: CenterInterval
    mean_sum: float
    range_condition: Optional[bool] = None

    def __eq__(self, other):
        if isinstance(other, str):
            return self.verdict == other
        return NotImplemented

    __hash__ = None

    def to_dict(self):
        out = {"verdict": self.verdict, "center_interval": self.center.to_dict(), "mean_sum": self.mean_sum}
        if self.range_condition is not None:
            out["range_condition"] = self.range_condition
        return out


def center_interval(marginals, opts=None) -> CenterInterval:
    """[sup R⁻ over Δ, inf R⁺ over Δ], the set that contains every possible center."""
    models = as_models(marginals)
    low = lower_quantile_bound(models, 1.0, opts, certify=False).value
    high = upper_quantile_bound(models, 0.0, opts, certify=False).value
    return CenterInterval(low, high)


def jm_check_location_scale(scales: Sequence[float]) -> bool:
    """Symmetric unimodal location-scale marginals are JM iff 2 max(a) <= sum(a)."""
    scales = [float(a) for a in scales]
    if not scales or any(not a > 0 for a in scales):
        raise OutOfDomain("scales must be positive")
    return 2.0 * max(scales) <= sum(scales) * (1.0 + 1e-12)


def _same_symmetric_family(models):
    kinds = {type(m) for m in models}
    return len(kinds) == 1 and isinstance(models[0], _SYMMETRIC_FAMILIES)


def jm_check_finite_mean(marginals, opts=None) -> JMReport:
    """Decide JM for finite-mean marginals when a characterisation applies.

    With monotone densities (all decreasing or all increasing on the support)
    or a common symmetric unimodal location-scale family, the marginals are
    JM iff sup R⁻ = sum of means = inf R⁺. Otherwise the verdict is
    inconclusive and only the center interval is reported.
    """
    models = as_models(marginals)
    for m in models:
        if not m.mean_finite:
            raise MeanUndefined(f"{m!r} has no finite mean")
    total = float(sum(m.mean() for m in models))
    center = center_interval(models, opts)
    tol = 1e-5 * (1.0 + abs(total))
    equal = abs(center.low - total) <= tol and abs(center.high - total) <= tol

    decreasing = all(m.shape.decreasing_beyond(0.0) for m in models)
    increasing = all(m.shape.increasing_below(1.0) for m in models)
    range_ok = None
    if decreasing:
        lows = [m.qr(0.0) for m in models]
        spread = max(m.ql(1.0) - lo for m, lo in zip(models, lows))
        slack = sum(m.mean() - lo for m, lo in zip(models, lows))
        range_ok = bool(spread <= slack * (1.0 + 1e-12) + 1e-12)
    if decreasing or increasing or _same_symmetric_family(models):
        verdict = JM if equal else NOT_JM
        if range_ok is not None and range_ok != equal:
            verdict = JM if range_ok else NOT_JM
        return JMReport(verdict, center, total, range_ok)
    if len(models) == 1:
        single = models[0].support
        return JMReport(JM if single[0] == single[1] else NOT_JM, center, total)
    if not center.nonempty or not (center.low - tol <= total <= center.high + tol):
        return JMReport(NOT_JM, center, total)
    return JMReport(INCONCLUSIVE, center, total, range_ok)
