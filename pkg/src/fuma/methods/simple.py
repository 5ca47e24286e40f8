"""Random-walk family: naive, seasonal naive, and drift forecasts."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from fuma.core import IntervalForecast, TimeSeries
from fuma.methods.base import gaussian_intervals


def _seasonal_naive(y: np.ndarray, m: int, h: int,
                    levels: Sequence[float]) -> dict[int, IntervalForecast]:
    n = len(y)
    steps = np.arange(1, h + 1)
    point = y[n - m + ((steps - 1) % m)]
    resid = y[m:] - y[:-m]
    sigma2 = float(np.dot(resid, resid) / len(resid))
    variance = sigma2 * ((steps - 1) // m + 1)
    return gaussian_intervals(point, variance, levels)


def naive_forecast(train: TimeSeries, levels: Sequence[float],
                   h: int | None = None) -> dict[int, IntervalForecast]:
    """Repeat the last observation; variance grows linearly with horizon."""
    h = h or train.horizon
    return _seasonal_naive(train.values, 1, h, levels)


def snaive_forecast(train: TimeSeries, levels: Sequence[float],
                    h: int | None = None) -> dict[int, IntervalForecast]:
    """Repeat the most recent value of the same season.

    For m = 1 this is exactly the naive forecast (same code path).
    """
    h = h or train.horizon
    return _seasonal_naive(train.values, train.period, h, levels)


def rw_drift_forecast(train: TimeSeries, levels: Sequence[float],
                      h: int | None = None) -> dict[int, IntervalForecast]:
    """Random walk with drift (Y_n - Y_1)/(n - 1) per step."""
    h = h or train.horizon
    y = train.values
    n = len(y)
    drift = (y[-1] - y[0]) / (n - 1)
    steps = np.arange(1, h + 1)
    point = y[-1] + drift * steps
    resid = np.diff(y) - drift
    dof = max(n - 2, 1)
    sigma2 = float(np.dot(resid, resid) / dof)
    variance = sigma2 * steps * (1.0 + steps / (n - 1.0))
    return gaussian_intervals(point, variance, levels)
