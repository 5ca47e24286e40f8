"""Theta forecast: average of a fitted trend line and SES on the
doubled-curvature line, with additive seasonal adjustment.

The point forecast averages the theta(0) line extrapolation with simple
exponential smoothing applied to the theta(2) line (2y minus the trend
line); interval variance is the SES h-step formula sigma^2 (1 + (h-1)
alpha^2). Seasonal adjustment is additive so the whole method is
translation-equivariant.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from fuma import _numerics as nx
from fuma._initstate import _centered_ma
from fuma.core import IntervalForecast, TimeSeries
from fuma.methods.base import gaussian_intervals


def seasonality_detected(y: np.ndarray, m: int) -> bool:
    """Autocorrelation test at the seasonal lag (5% one-sided)."""
    n = len(y)
    if m <= 1 or n <= 2 * m:
        return False
    yc = y - y.mean()
    denom = float(np.dot(yc, yc))
    if denom <= 0.0:
        return False
    r = np.array([float(np.dot(yc[:-k], yc[k:]) / denom)
                  for k in range(1, m + 1)])
    stat = np.sqrt((1.0 + 2.0 * float(np.sum(r[:-1] ** 2))) / n)
    return bool(abs(r[m - 1]) / stat > 1.6448536269514722)


def seasonal_indices(y: np.ndarray, m: int) -> np.ndarray:
    """Additive classical-decomposition indices by position, centered."""
    trend = _centered_ma(y, m)
    offset = (len(y) - len(trend)) // 2
    detrended = y[offset: offset + len(trend)] - trend
    sums = np.zeros(m)
    counts = np.zeros(m)
    for i, value in enumerate(detrended):
        pos = (offset + i) % m
        sums[pos] += value
        counts[pos] += 1
    means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return means - means.mean()


def _ses_fit(x: np.ndarray) -> tuple[float, float, float]:
    """Optimize (alpha, l0) of simple exponential smoothing; returns
    (alpha, final level, sse)."""
    n = len(x)
    ints = np.array([nx.OBJ_ETS, 1, 0, 0, 1, 0, 0], dtype=np.int64)
    floats = np.array([x[0], 0.0, 0.0])
    sd = float(x.std())
    x0 = np.array([0.0, x[0]])
    steps = np.array([1.0, max(0.5 * sd, 1e-8)])
    best, sse = nx.nelder_mead(nx.OBJ_ETS, x, ints, floats, x0, steps,
                               400, 1e-10)
    lo, hi = 1e-4, 0.9999
    alpha = lo + (hi - lo) * (1.0 / (1.0 + np.exp(-best[0]))
                              if best[0] >= 0
                              else np.exp(best[0]) / (1.0 + np.exp(best[0])))
    _, level, _, _ = nx.ets_filter(x, 1, 0, 0, alpha, 0.0, 1.0, 0.0,
                                   float(best[1]), 0.0, np.zeros(1))
    return float(alpha), float(level), float(sse)


def theta_forecast(train: TimeSeries, levels: Sequence[float],
                   h: int | None = None) -> dict[int, IntervalForecast]:
    h = h or train.horizon
    y = train.values
    n = len(y)
    m = train.period

    if seasonality_detected(y, m):
        idx = seasonal_indices(y, m)
        adjusted = y - idx[np.arange(n) % m]
        future_seasonal = idx[(n + np.arange(1, h + 1) - 1) % m]
    else:
        adjusted = y.copy()
        future_seasonal = np.zeros(h)

    t = np.arange(n, dtype=np.float64)
    design = np.column_stack([np.ones(n), t])
    coef, *_ = np.linalg.lstsq(design, adjusted, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    line = intercept + slope * t

    theta2 = 2.0 * adjusted - line
    alpha, level, sse = _ses_fit(theta2)
    sigma2 = sse / max(n - 2, 1)

    steps = np.arange(1, h + 1)
    line_future = intercept + slope * (n - 1 + steps)
    point = 0.5 * (line_future + level) + future_seasonal
    variance = sigma2 * (1.0 + (steps - 1) * alpha ** 2)
    return gaussian_intervals(point, variance, levels)
