"""Marginal distributions described through their quantile functions.

Every model exposes the left quantile ``q⁻_u = inf{x : F(x) >= u}`` on (0, 1]
and the right quantile ``q⁺_u = inf{x : F(x) > u}`` on [0, 1), together with an
exact or numerical antiderivative of the quantile function. Range values
(RVaR), expected shortfalls and means are averages of the quantile over a
probability window, so everything downstream is built on ``integral``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from ._quadrature import integrate_vectorized
from .exceptions import EmptySlice, MeanUndefined, ModelSpecError, OutOfDomain

_SNAP = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class DensityShape:
    """Monotonicity of the density in probability coordinates.

    ``decreasing_from`` is the level from which the density is nonincreasing
    (0 means on the whole support, ``None`` means never declared).
    ``increasing_until`` is the level below which it is nondecreasing.
    """

    decreasing_from: Optional[float] = None
    increasing_until: Optional[float] = None

    def decreasing_beyond(self, t: float) -> bool:
        return self.decreasing_from is not None and self.decreasing_from <= t + 1e-12

    def increasing_below(self, t: float) -> bool:
        return self.increasing_until is not None and self.increasing_until >= t - 1e-12

    @property
    def label(self) -> str:
        dec, inc = self.decreasing_from, self.increasing_until
        if dec == 0.0 and inc == 1.0:
            return "DecreasingOnSupport"  # constant density is both
        if dec == 0.0:
            return "DecreasingOnSupport"
        if inc == 1.0:
            return "IncreasingOnSupport"
        if dec is not None:
            return f"DecreasingBeyond({dec:.6g})"
        if inc is not None:
            return f"IncreasingBelow({inc:.6g})"
        return "Unknown"

    def sliced(self, a: float, b: float) -> "DensityShape":
        width = b - a
        dec = inc = None
        if self.decreasing_from is not None and self.decreasing_from < b:
            dec = max(0.0, (self.decreasing_from - a) / width)
        if self.increasing_until is not None and self.increasing_until > a:
            inc = min(1.0, (self.increasing_until - a) / width)
        return DensityShape(dec, inc)

    def reflected(self) -> "DensityShape":
        dec = None if self.increasing_until is None else 1.0 - self.increasing_until
        inc = None if self.decreasing_from is None else 1.0 - self.decreasing_from
        return DensityShape(dec, inc)


UNKNOWN = DensityShape()
DECREASING = DensityShape(0.0, None)
INCREASING = DensityShape(None, 1.0)
FLAT = DensityShape(0.0, 1.0)


def _as_array(u):
    return np.asarray(u, dtype=float)


def _unwrap(x, like):
    return float(x) if np.ndim(like) == 0 else x


class QuantileModel:
    """Base class for one-dimensional laws given by quantile functions.

    Subclasses implement ``_ql`` (and ``_qr`` when the quantile can jump) on
    numpy arrays, and preferably ``_integral``. Generic fallbacks compute the
    CDF by bisection on the quantile and integrals by adaptive Simpson.
    """

    family = "custom"
    shape = UNKNOWN
    continuous = True

    def _ql(self, u):
        raise NotImplementedError

    def _qr(self, u):
        return self._ql(u)

    def ql(self, u):
        """Left quantile q⁻_u, vectorised, for u in (0, 1]."""
        arr = _as_array(u)
        return _unwrap(self._ql(arr), u)

    def qr(self, u):
        """Right quantile q⁺_u, vectorised, for u in [0, 1)."""
        arr = _as_array(u)
        return _unwrap(self._qr(arr), u)

    def _integral(self, a, b):
        return integrate_vectorized(lambda v: self._ql(np.asarray(v)), a, b)

    def integral(self, a, b):
        """Integral of the quantile over [a, b]; NaN marks an undefined form."""
        a, b = np.broadcast_arrays(_as_array(a), _as_array(b))
        out = np.zeros(a.shape)
        live = b > a
        if np.any(live):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out[live] = self._integral(a[live], b[live])
        return out if out.ndim else float(out)

    def cdf(self, x):
        """F(x) = P(X <= x)."""
        return self._bisect_cdf(x, strict=False)

    def cdf_left(self, x):
        """P(X < x)."""
        if self.continuous:
            return self.cdf(x)
        return self._bisect_cdf(x, strict=True)

    def _bisect_cdf(self, x, strict):
        x = _as_array(x)
        lo = np.zeros(x.shape)
        hi = np.ones(x.shape)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            q = self._ql(np.maximum(mid, 1e-300))
            ok = q < x if strict else q <= x
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        top = self._ql(np.ones(x.shape))
        out = np.where((top < x) if strict else (top <= x), 1.0, lo)
        return _unwrap(out, x)

    @property
    def support(self):
        return (float(self._qr(np.array(0.0))), float(self._ql(np.array(1.0))))

    def mean(self) -> float:
        value = self.integral(0.0, 1.0)
        if math.isnan(value):
            raise MeanUndefined(f"{self!r} has no mean: both tails diverge")
        return value

    @property
    def mean_finite(self) -> bool:
        try:
            return math.isfinite(self.mean())
        except MeanUndefined:
            return False

    @property
    def density_shape(self) -> str:
        return self.shape.label

    def breakpoints(self):
        """Levels in (0, 1) where the quantile may jump, or None if continuous."""
        return None

    @property
    def atom_count(self):
        """Number of equally weighted atoms for uniform discrete laws."""
        return None


@dataclass(frozen=True)
class PointMass(QuantileModel):
    c: float
    family = "point_mass"
    continuous = True

    def _ql(self, u):
        return np.full(np.shape(u), float(self.c))

    def _integral(self, a, b):
        return self.c * (b - a)

    def cdf(self, x):
        return _unwrap(np.where(_as_array(x) >= self.c, 1.0, 0.0), x)

    def cdf_left(self, x):
        return _unwrap(np.where(_as_array(x) > self.c, 1.0, 0.0), x)

    @property
    def atom_count(self):
        return 1


@dataclass(frozen=True)
class Uniform(QuantileModel):
    a: float = 0.0
    b: float = 1.0
    family = "uniform"
    shape = FLAT

    def __post_init__(self):
        if not self.a < self.b:
            raise ModelSpecError(f"uniform needs a < b, got a={self.a}, b={self.b}")

    def _ql(self, u):
        return self.a + (self.b - self.a) * u

    def _integral(self, x, y):
        return self.a * (y - x) + 0.5 * (self.b - self.a) * (y * y - x * x)

    def cdf(self, x):
        return _unwrap(np.clip((_as_array(x) - self.a) / (self.b - self.a), 0.0, 1.0), x)


@dataclass(frozen=True)
class Exponential(QuantileModel):
    rate: float = 1.0
    family = "exponential"
    shape = DECREASING

    def __post_init__(self):
        if not self.rate > 0:
            raise ModelSpecError("exponential rate must be positive")

    def _ql(self, u):
        with np.errstate(divide="ignore"):
            return -np.log1p(-u) / self.rate

    def _integral(self, x, y):
        def anti(v):
            return special.xlogy(1.0 - v, 1.0 - v) + v

        return (anti(y) - anti(x)) / self.rate

    def cdf(self, x):
        x = _as_array(x)
        return _unwrap(np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0)), 0.0), x)


@dataclass(frozen=True)
class Pareto(QuantileModel):
    """Pareto law with q_u = scale * (1 - u)^(-1/theta)."""

    scale: float = 1.0
    theta: float = 1.0
    family = "pareto"
    shape = DECREASING

    def __post_init__(self):
        if not (self.scale > 0 and self.theta > 0):
            raise ModelSpecError("pareto needs positive scale and theta")

    def _ql(self, u):
        with np.errstate(divide="ignore"):
            return self.scale * (1.0 - u) ** (-1.0 / self.theta)

    def _integral(self, x, y):
        if self.theta == 1.0:
            with np.errstate(divide="ignore"):
                return self.scale * (np.log1p(-x) - np.log1p(-y))
        p = 1.0 - 1.0 / self.theta
        with np.errstate(divide="ignore"):
            return self.scale * ((1.0 - x) ** p - (1.0 - y) ** p) / p

    def cdf(self, x):
        x = _as_array(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x >= self.scale, -np.expm1(-self.theta * np.log(np.maximum(x, self.scale) / self.scale)), 0.0)
        return _unwrap(out, x)


def _phi_diff(hi, lo):
    """Phi(hi) - Phi(lo) without cancellation in the upper tail."""
    return np.where(lo > 0, special.ndtr(-lo) - special.ndtr(-hi), special.ndtr(hi) - special.ndtr(lo))


@dataclass(frozen=True)
class Lognormal(QuantileModel):
    mu: float = 0.0
    sigma: float = 1.0
    family = "lognormal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ModelSpecError("lognormal sigma must be positive")

    @property
    def shape(self):
        mode_level = float(special.ndtr(-self.sigma))
        return DensityShape(mode_level, mode_level)

    def _ql(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u))

    def _integral(self, x, y):
        c = math.exp(self.mu + 0.5 * self.sigma**2)
        zx = special.ndtri(x) - self.sigma
        zy = special.ndtri(y) - self.sigma
        return c * _phi_diff(zy, zx)

    def cdf(self, x):
        x = _as_array(x)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / self.sigma
        return _unwrap(np.where(x > 0, special.ndtr(z), 0.0), x)


@dataclass(frozen=True)
class Gamma(QuantileModel):
    """Gamma law with shape ``k`` and scale ``theta``."""

    k: float = 1.0
    theta: float = 1.0
    family = "gamma"

    def __post_init__(self):
        if not (self.k > 0 and self.theta > 0):
            raise ModelSpecError("gamma needs positive shape and scale")

    @property
    def shape(self):
        if self.k <= 1:
            return DECREASING
        mode_level = float(special.gammainc(self.k, self.k - 1.0))
        return DensityShape(mode_level, mode_level)

    def _std_quantile(self, u):
        upper = u > 0.5
        return np.where(upper, special.gammainccinv(self.k, 1.0 - u), special.gammaincinv(self.k, u))

    def _ql(self, u):
        return self.theta * self._std_quantile(u)

    def _integral(self, x, y):
        zx = self._std_quantile(x)
        zy = self._std_quantile(y)
        k1 = self.k + 1.0
        diff = np.where(
            x > 0.5,
            special.gammaincc(k1, zx) - special.gammaincc(k1, zy),
            special.gammainc(k1, zy) - special.gammainc(k1, zx),
        )
        return self.k * self.theta * diff

    def cdf(self, x):
        x = _as_array(x)
        return _unwrap(special.gammainc(self.k, np.maximum(x, 0.0) / self.theta), x)


@dataclass(frozen=True)
class Normal(QuantileModel):
    loc: float = 0.0
    scale: float = 1.0
    family = "normal"

    def __post_init__(self):
        if not self.scale > 0:
            raise ModelSpecError("normal scale must be positive")

    @property
    def shape(self):
        return DensityShape(0.5, 0.5)

    def _ql(self, u):
        return self.loc + self.scale * special.ndtri(u)

    def _integral(self, x, y):
        def pdf_at(v):
            z = special.ndtri(v)
            return np.where(np.isfinite(z), np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi), 0.0)

        return self.loc * (y - x) - self.scale * (pdf_at(y) - pdf_at(x))

    def cdf(self, x):
        return _unwrap(special.ndtr((_as_array(x) - self.loc) / self.scale), x)


@dataclass(frozen=True)
class Cauchy(QuantileModel):
    loc: float = 0.0
    scale: float = 1.0
    family = "cauchy"

    def __post_init__(self):
        if not self.scale > 0:
            raise ModelSpecError("cauchy scale must be positive")

    @property
    def shape(self):
        return DensityShape(0.5, 0.5)

    def _ql(self, u):
        near = np.minimum(u, 1.0 - u)
        sign = np.where(u >= 0.5, 1.0, -1.0)
        with np.errstate(divide="ignore"):
            return self.loc + sign * self.scale / np.tan(np.pi * near)

    def _integral(self, x, y):
        def log_sin(v):
            return np.log(np.sin(np.pi * np.minimum(v, 1.0 - v)))

        with np.errstate(divide="ignore"):
            return self.loc * (y - x) + self.scale / np.pi * (log_sin(x) - log_sin(y))

    def cdf(self, x):
        return _unwrap(0.5 + np.arctan((_as_array(x) - self.loc) / self.scale) / np.pi, x)


def _snap_index(r):
    """Round values within a relative hair of an integer onto that integer."""
    rounded = np.round(r)
    return np.where(np.abs(r - rounded) <= _SNAP * np.maximum(1.0, np.abs(r)), rounded, r)


@dataclass(frozen=True, eq=False)
class Empirical(QuantileModel):
    """Equally weighted atoms; quantiles and integrals are exact step sums."""

    values: tuple = field(default=())
    family = "empirical"
    continuous = False

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        if vals.size == 0:
            raise ModelSpecError("empirical model needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise ModelSpecError("empirical values must be finite")
        object.__setattr__(self, "values", tuple(vals.tolist()))
        object.__setattr__(self, "_x", vals)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(vals)]))

    def __eq__(self, other):
        return type(self) is type(other) and self.values == other.values

    def __hash__(self):
        return hash((type(self).__name__, self.values))

    @property
    def m(self) -> int:
        return len(self.values)

    def _ql(self, u):
        r = _snap_index(u * self.m)
        idx = np.clip(np.ceil(r).astype(int) - 1, 0, self.m - 1)
        return self._x[idx]

    def _qr(self, u):
        r = _snap_index(u * self.m)
        idx = np.clip(np.floor(r).astype(int), 0, self.m - 1)
        return self._x[idx]

    def _antiderivative(self, v):
        r = _snap_index(v * self.m)
        k = np.clip(np.floor(r).astype(int), 0, self.m)
        frac = r - k
        nxt = self._x[np.minimum(k, self.m - 1)]
        return (self._cum[k] + np.where(frac > 0, frac * nxt, 0.0)) / self.m

    def _integral(self, a, b):
        return self._antiderivative(b) - self._antiderivative(a)

    def cdf(self, x):
        x = _as_array(x)
        return _unwrap(np.searchsorted(self._x, x, side="right") / self.m, x)

    def cdf_left(self, x):
        x = _as_array(x)
        return _unwrap(np.searchsorted(self._x, x, side="left") / self.m, x)

    def breakpoints(self):
        return np.arange(1, self.m) / self.m

    @property
    def atom_count(self):
        return self.m


class DiscreteUniform(Empirical):
    family = "discrete_uniform"


@dataclass(frozen=True, eq=False)
class TableQuantile(QuantileModel):
    """Piecewise-linear quantile through nodes (levels[k], values[k])."""

    levels: tuple = field(default=(0.0, 1.0))
    values: tuple = field(default=(0.0, 1.0))
    family = "table"

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        vv = np.asarray(self.values, dtype=float)
        if lv.shape != vv.shape or lv.size < 2:
            raise ModelSpecError("table needs matching levels and values of length >= 2")
        if lv[0] != 0.0 or lv[-1] != 1.0 or np.any(np.diff(lv) <= 0):
            raise ModelSpecError("table levels must increase strictly from 0 to 1")
        if np.any(np.diff(vv) < 0) or not np.all(np.isfinite(vv)):
            raise ModelSpecError("table values must be finite and nondecreasing")
        object.__setattr__(self, "levels", tuple(lv.tolist()))
        object.__setattr__(self, "values", tuple(vv.tolist()))
        object.__setattr__(self, "_lv", lv)
        object.__setattr__(self, "_vv", vv)
        pieces = 0.5 * np.diff(lv) * (vv[1:] + vv[:-1])
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(pieces)]))

    def __eq__(self, other):
        return type(self) is type(other) and (self.levels, self.values) == (other.levels, other.values)

    def __hash__(self):
        return hash((self.levels, self.values))

    @property
    def shape(self):
        slopes = np.diff(self._vv) / np.diff(self._lv)
        if np.all(np.diff(slopes) >= -1e-12):
            return DECREASING
        if np.all(np.diff(slopes) <= 1e-12):
            return INCREASING
        return UNKNOWN

    def _ql(self, u):
        return np.interp(u, self._lv, self._vv)

    def _antiderivative(self, v):
        k = np.clip(np.searchsorted(self._lv, v, side="right") - 1, 0, len(self._lv) - 2)
        left = self._lv[k]
        qv = np.interp(v, self._lv, self._vv)
        return self._cum[k] + 0.5 * (v - left) * (self._vv[k] + qv)

    def _integral(self, a, b):
        return self._antiderivative(b) - self._antiderivative(a)


@dataclass(frozen=True)
class Slice(QuantileModel):
    """Law of q_V(base) with V uniform on [a, b]."""

    base: QuantileModel
    a: float
    b: float
    family = "slice"

    @property
    def continuous(self):
        return self.base.continuous

    @property
    def shape(self):
        return self.base.shape.sliced(self.a, self.b)

    def _map(self, u):
        return self.a + (self.b - self.a) * u

    def _ql(self, u):
        return self.base._ql(self._map(u))

    def _qr(self, u):
        return self.base._qr(self._map(u))

    def _integral(self, x, y):
        return self.base._integral(self._map(x), self._map(y)) / (self.b - self.a)

    def cdf(self, x):
        f = _as_array(self.base.cdf(x))
        return _unwrap(np.clip((f - self.a) / (self.b - self.a), 0.0, 1.0), x)

    def cdf_left(self, x):
        f = _as_array(self.base.cdf_left(x))
        return _unwrap(np.clip((f - self.a) / (self.b - self.a), 0.0, 1.0), x)

    def breakpoints(self):
        bp = self.base.breakpoints()
        if bp is None:
            return None
        inside = bp[(bp > self.a) & (bp < self.b)]
        return (inside - self.a) / (self.b - self.a)


@dataclass(frozen=True)
class Truncated(QuantileModel):
    """Law of min(X, cap)."""

    base: QuantileModel
    cap: float
    family = "truncated"

    @property
    def continuous(self):
        return self.base.continuous

    @property
    def shape(self):
        inc = self.base.shape.increasing_until
        return DensityShape(None, None if inc is None else min(inc, self._level))

    @property
    def _level(self):
        return float(self.base.cdf(self.cap))

    def _ql(self, u):
        return np.minimum(self.base._ql(u), self.cap)

    def _qr(self, u):
        return np.minimum(self.base._qr(u), self.cap)

    def _integral(self, x, y):
        p = self._level
        top = np.minimum(y, p)
        low = np.minimum(x, top)
        inner = np.where(top > low, self.base.integral(low, top), 0.0)
        return inner + self.cap * np.maximum(0.0, y - np.maximum(x, p))

    def cdf(self, x):
        x = _as_array(x)
        return _unwrap(np.where(x >= self.cap, 1.0, self.base.cdf(x)), x)

    def cdf_left(self, x):
        x = _as_array(x)
        return _unwrap(np.where(x > self.cap, 1.0, self.base.cdf_left(x)), x)


@dataclass(frozen=True)
class Affine(QuantileModel):
    """Law of loc + scale * X; a negative scale reflects the base law."""

    base: QuantileModel
    loc: float = 0.0
    scale: float = 1.0
    family = "affine"

    def __post_init__(self):
        if self.scale == 0:
            raise ModelSpecError("affine scale must be nonzero")

    @property
    def continuous(self):
        return self.base.continuous

    @property
    def shape(self):
        return self.base.shape if self.scale > 0 else self.base.shape.reflected()

    def _ql(self, u):
        if self.scale > 0:
            return self.loc + self.scale * self.base._ql(u)
        return self.loc + self.scale * self.base._qr(1.0 - u)

    def _qr(self, u):
        if self.scale > 0:
            return self.loc + self.scale * self.base._qr(u)
        return self.loc + self.scale * self.base._ql(1.0 - u)

    def _integral(self, x, y):
        if self.scale > 0:
            return self.loc * (y - x) + self.scale * self.base._integral(x, y)
        return self.loc * (y - x) + self.scale * self.base._integral(1.0 - y, 1.0 - x)

    def cdf(self, x):
        z = (_as_array(x) - self.loc) / self.scale
        if self.scale > 0:
            return _unwrap(_as_array(self.base.cdf(z)), x)
        return _unwrap(1.0 - _as_array(self.base.cdf_left(z)), x)

    def cdf_left(self, x):
        z = (_as_array(x) - self.loc) / self.scale
        if self.scale > 0:
            return _unwrap(_as_array(self.base.cdf_left(z)), x)
        return _unwrap(1.0 - _as_array(self.base.cdf(z)), x)

    def breakpoints(self):
        bp = self.base.breakpoints()
        if bp is None or self.scale > 0:
            return bp
        return np.sort(1.0 - bp)

    @property
    def atom_count(self):
        return self.base.atom_count


# operations -----------------------------------------------------------------


def _check_probability(name, value, lo_open=False, hi_open=False):
    value = float(value)
    bad = not (0.0 <= value <= 1.0) or (lo_open and value == 0.0) or (hi_open and value == 1.0)
    if bad or math.isnan(value):
        lo = "(" if lo_open else "["
        hi = ")" if hi_open else "]"
        raise OutOfDomain(f"{name}={value} outside {lo}0, 1{hi}")
    return value


def quantile(model: QuantileModel, u: float, side: str = "left") -> float:
    """q⁻_u (side='left', u in (0,1]) or q⁺_u (side='right', u in [0,1))."""
    side = side.lower()
    if side == "left":
        return model.ql(_check_probability("u", u, lo_open=True))
    if side == "right":
        return model.qr(_check_probability("u", u, hi_open=True))
    raise OutOfDomain(f"side must be 'left' or 'right', got {side!r}")


def rvar(model: QuantileModel, beta: float, alpha: float) -> float:
    """Average of the quantile over the probability window [1-beta-alpha, 1-beta]."""
    beta = _check_probability("beta", beta)
    alpha = float(alpha)
    if not (alpha > 0.0 and beta + alpha <= 1.0 + 1e-15):
        raise OutOfDomain(f"need alpha > 0 and beta + alpha <= 1, got beta={beta}, alpha={alpha}")
    hi = 1.0 - beta
    lo = max(0.0, hi - alpha)
    value = model.integral(lo, hi) / alpha
    if math.isnan(value):
        raise MeanUndefined(f"both tails of {model!r} diverge over the full window")
    return value


def expected_shortfall(model, alpha):
    return rvar(model, 0.0, alpha)


def left_expected_shortfall(model, alpha):
    return rvar(model, 1.0 - alpha, alpha)


def mean(model):
    return model.mean()


def slice(model: QuantileModel, a: float, b: float) -> QuantileModel:  # noqa: A001
    """Law of q_V(model) for V uniform on [a, b]."""
    a, b = float(a), float(b)
    if not a < b:
        raise EmptySlice(f"slice needs a < b, got [{a}, {b}]")
    _check_probability("a", a)
    _check_probability("b", b)
    if a == 0.0 and b == 1.0:
        return model
    if isinstance(model, PointMass):
        return model
    if isinstance(model, Uniform):
        return Uniform(float(model.ql(a)) if a > 0 else model.a, float(model.ql(b)))
    if isinstance(model, Empirical):
        lo, hi = _snap_index(np.array([a, b]) * model.m)
        if lo == round(lo) and hi == round(hi):
            return type(model)(model.values[int(lo) : int(hi)])
    if isinstance(model, Slice):
        w = model.b - model.a
        return Slice(model.base, model.a + w * a, model.a + w * b)
    return Slice(model, a, b)


def tail_upper(model: QuantileModel, t: float) -> QuantileModel:
    """The t-tail law, with left quantile u -> q⁻_{t+(1-t)u}."""
    t = _check_probability("t", t, hi_open=True)
    return slice(model, t, 1.0)


def tail_lower(model: QuantileModel, t: float) -> QuantileModel:
    t = _check_probability("t", t, lo_open=True)
    return slice(model, 0.0, t)


def truncate_upper(model: QuantileModel, m: float) -> QuantileModel:
    """Law of min(X, m)."""
    m = float(m)
    if isinstance(model, PointMass):
        return PointMass(min(model.c, m))
    if isinstance(model, Empirical):
        return type(model)(np.minimum(model._x, m))
    if model.support[1] <= m:
        return model
    return Truncated(model, m)


def affine(model: QuantileModel, loc: float = 0.0, scale: float = 1.0) -> QuantileModel:
    if isinstance(model, PointMass):
        return PointMass(loc + scale * model.c)
    return Affine(model, float(loc), float(scale))


def jump(model: QuantileModel, u):
    """Size q⁺_u - q⁻_u of the quantile jump at u (zero for continuous laws)."""
    if model.continuous:
        return np.zeros(np.shape(u)) if np.ndim(u) else 0.0
    return model.qr(u) - model.ql(u)


# JSON model specs ------------------------------------------------------------

_FAMILIES = {
    "pareto": (Pareto, ("scale", "theta")),
    "uniform": (Uniform, ("a", "b")),
    "lognormal": (Lognormal, ("mu", "sigma")),
    "gamma": (Gamma, ("k", "theta")),
    "exponential": (Exponential, ("rate",)),
    "cauchy": (Cauchy, ("loc", "scale")),
    "normal": (Normal, ("loc", "scale")),
    "point_mass": (PointMass, ("c",)),
}
_VALUE_FAMILIES = {"empirical": Empirical, "discrete_uniform": DiscreteUniform}


def model_from_dict(spec: dict) -> QuantileModel:
    """Build a model from a JSON-style dict such as
    ``{"family": "pareto", "params": {"scale": 1, "theta": 3}}``."""
    if not isinstance(spec, dict):
        raise ModelSpecError(f"model spec must be an object, got {type(spec).__name__}")
    allowed_top = {"family", "params", "values", "levels", "repeat"}
    for key in spec:
        if key not in allowed_top:
            raise ModelSpecError(f"unknown key {key!r} in model spec")
    if "family" not in spec:
        raise ModelSpecError("model spec is missing key 'family'")
    family = str(spec["family"]).lower()
    if family in _VALUE_FAMILIES:
        if "values" not in spec:
            raise ModelSpecError(f"family {family!r} requires key 'values'")
        return _VALUE_FAMILIES[family](tuple(spec["values"]))
    if family == "table":
        for key in ("levels", "values"):
            if key not in spec:
                raise ModelSpecError(f"family 'table' requires key {key!r}")
        return TableQuantile(tuple(spec["levels"]), tuple(spec["values"]))
    if family not in _FAMILIES:
        raise ModelSpecError(f"unknown family {family!r} under key 'family'")
    cls, names = _FAMILIES[family]
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ModelSpecError("key 'params' must be an object")
    for key in params:
        if key not in names:
            raise ModelSpecError(f"unknown parameter {key!r} for family {family!r}")
    missing = [n for n in names if n not in params]
    if missing:
        raise ModelSpecError(f"family {family!r} is missing parameter {missing[0]!r}")
    try:
        args = [float(params[n]) for n in names]
    except (TypeError, ValueError) as exc:
        raise ModelSpecError(f"non-numeric parameter in {family!r}: {exc}") from None
    return cls(*args)


def models_from_json(data) -> list:
    """Parse a list of model specs (or ``{"marginals": [...]}``); an entry may
    carry ``"repeat": k`` to stand for k identical marginals."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelSpecError(f"malformed JSON: {exc}") from None
    if isinstance(data, dict):
        if "marginals" not in data:
            raise ModelSpecError("expected a list of models or an object with key 'marginals'")
        data = data["marginals"]
    if not isinstance(data, list) or not data:
        raise ModelSpecError("key 'marginals' must be a nonempty list")
    out = []
    for entry in data:
        model = model_from_dict(entry)
        repeat = entry.get("repeat", 1)
        if not isinstance(repeat, int) or repeat < 1:
            raise ModelSpecError("key 'repeat' must be a positive integer")
        out.extend([model] * repeat)
    return out


def model_to_dict(model: QuantileModel) -> dict:
    if isinstance(model, Empirical):
        return {"family": model.family, "values": list(model.values)}
    if isinstance(model, TableQuantile):
        return {"family": "table", "levels": list(model.levels), "values": list(model.values)}
    for name, (cls, names) in _FAMILIES.items():
        if type(model) is cls:
            return {"family": name, "params": {n: getattr(model, n) for n in names}}
    raise ModelSpecError(f"{type(model).__name__} has no JSON form")


def as_models(marginals: Sequence) -> list:
    out = []
    for m in marginals:
        if isinstance(m, QuantileModel):
            out.append(m)
        elif isinstance(m, dict):
            out.append(model_from_dict(m))
        else:
            raise ModelSpecError(f"cannot interpret {m!r} as a marginal model")
    if not out:
        raise ModelSpecError("at least one marginal is required")
    return out
