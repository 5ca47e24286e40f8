"""Heuristic initial states for exponential-smoothing recursions.

States are fixed before optimization: a classical-decomposition seasonal
index and a linear fit on the first deseasonalized observations. Only the
smoothing weights are optimized afterwards, which keeps the parameter space
small and the fits fast and reproducible.
"""
from __future__ import annotations

import numpy as np


def _centered_ma(x: np.ndarray, m: int) -> np.ndarray:
    """Centered moving average of window m (2xm when m is even).

    Returns the valid region only; it is shorter than x by m points (even m)
    or m - 1 points (odd m).
    """
    if m % 2 == 0:
        w = np.full(m + 1, 1.0 / m)
        w[0] = w[-1] = 0.5 / m
    else:
        w = np.full(m, 1.0 / m)
    return np.convolve(x, w, mode="valid")


def _linear_fit(y: np.ndarray) -> tuple[float, float]:
    k = len(y)
    if k == 1:
        return float(y[0]), 0.0
    t = np.arange(k, dtype=np.float64)
    design = np.column_stack([np.ones(k), t])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0]), float(coef[1])


def heuristic_states(y: np.ndarray, m: int, seasonal: bool) -> tuple[float, float, np.ndarray]:
    """Initial (level, trend, seasonal) states for an additive recursion.

    Seasonal indices come from averaging the detrended values of the first
    few cycles by position (centered to sum to zero); level and trend from a
    least-squares line through the first ten deseasonalized points.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    s0 = np.zeros(max(m, 1))
    if seasonal and m > 1 and n >= 2 * m + 2:
        ncyc = min(n // m, 5)
        chunk = y[: ncyc * m]
        trend = _centered_ma(chunk, m)
        offset = (len(chunk) - len(trend)) // 2
        detrended = chunk[offset: offset + len(trend)] - trend
        sums = np.zeros(m)
        counts = np.zeros(m)
        for i, value in enumerate(detrended):
            pos = (offset + i) % m
            sums[pos] += value
            counts[pos] += 1
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        s0 = means - means.mean()
        head = y[: min(10, n)]
        idx = np.arange(len(head)) % m
        deseason = head - s0[idx]
        l0, b0 = _linear_fit(deseason)
    else:
        l0, b0 = _linear_fit(y[: min(10, n)])
    return l0, b0, s0
