"""Trace analytics: activation-time extraction and inflection pressure drop."""

import numpy as np

from .errors import InsufficientData

_SMOOTH_WINDOW = 5


def activation_time(times, series, reference, fraction=0.95):
    """First time the series crosses fraction * reference, interpolated.

    Returns None when the series never reaches the target (not a fault: a
    capped trace simply has no activation).  A series already at or above the
    target activates at the first sample.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if times.shape != series.shape or times.size == 0:
        raise InsufficientData("times and series must be equal-length, non-empty")
    target = fraction * reference
    if series[0] >= target:
        return float(times[0])
    above = np.nonzero(series >= target)[0]
    if above.size == 0:
        return None
    i = int(above[0])
    t0, t1 = times[i - 1], times[i]
    s0, s1 = series[i - 1], series[i]
    return float(t0 + (target - s0) * (t1 - t0) / (s1 - s0))


def release_time(times, series, reference, fraction=0.5):
    """First time the series falls below fraction * reference, interpolated.

    Mirror of :func:`activation_time` for deflation phases; None if the
    series never drops below the target.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    target = fraction * reference
    if series.size == 0:
        raise InsufficientData("empty series")
    if series[0] <= target:
        return float(times[0])
    below = np.nonzero(series <= target)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    t0, t1 = times[i - 1], times[i]
    s0, s1 = series[i - 1], series[i]
    return float(t0 + (target - s0) * (t1 - t0) / (s1 - s0))


def pressure_drop_at_inflection(times, upstream, downstream):
    """Upstream-minus-downstream pressure at the downstream activation inflection.

    The inflection is where the downstream trace rises fastest: centred
    differences of the downstream series, smoothed by a 5-sample moving
    average, maximised over the interior where the full window fits.
    """
    times = np.asarray(times, dtype=float)
    upstream = np.asarray(upstream, dtype=float)
    downstream = np.asarray(downstream, dtype=float)
    n = times.size
    if n < _SMOOTH_WINDOW or upstream.size != n or downstream.size != n:
        raise InsufficientData(
            f"need >= {_SMOOTH_WINDOW} shared samples, got {n}")
    deriv = np.gradient(downstream, times)
    smoothed = np.convolve(deriv, np.full(_SMOOTH_WINDOW, 1.0 / _SMOOTH_WINDOW),
                           mode="valid")
    half = _SMOOTH_WINDOW // 2
    i_star = half + int(np.argmax(smoothed))
    return float(upstream[i_star] - downstream[i_star])
