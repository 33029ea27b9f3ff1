import math

import numpy as np


def adaptive_simpson(f, a, b, rtol=1e-9, atol=1e-13, max_intervals=2**16):
    """Integrate a scalar function over [a, b] by adaptive Simpson.

    Endpoint values that are not finite are replaced by the value at a point
    nudged slightly inside the interval, which is enough for the integrable
    endpoint singularities of quantile functions.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, rtol, atol, max_intervals)

    nudge = 1e-13 * (b - a)

    def value(x):
        y = float(f(x))
        if not math.isfinite(y):
            y = float(f(min(max(x, a + nudge), b - nudge)))
        return y

    fa = value(a)
    fb = value(b)
    m = 0.5 * (a + b)
    fm = value(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    scale = abs(whole)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, 0)]
    intervals = 1
    while stack:
        lo, hi, flo, fmid, fhi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = value(lm)
        frm = value(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        refined = left + right
        share = (hi - lo) / (b - a)
        tol = max(atol, rtol * scale) * share
        if abs(refined - est) <= 15.0 * tol or intervals >= max_intervals or depth > 48:
            total += refined + (refined - est) / 15.0
            continue
        intervals += 1
        stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, depth + 1))
    return total


def integrate_vectorized(f, a, b, **kwargs):
    """Apply :func:`adaptive_simpson` elementwise over broadcast bounds."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = adaptive_simpson(f, a[idx], b[idx], **kwargs)
    return out
