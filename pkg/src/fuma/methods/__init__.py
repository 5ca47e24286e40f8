"""Forecasting method pool: eight univariate interval forecasters.

Every method shares one calling convention: ``(train, levels, h=None)`` in,
``{level_pct: IntervalForecast}`` out. ``forecast`` dispatches by method id
and converts any internal error into ``MethodFailed`` so batch callers can
substitute a fallback uniformly.
"""
from __future__ import annotations

from typing import Sequence

from fuma.core import IntervalForecast, TimeSeries
from fuma.errors import MethodFailed
from fuma.methods.arima import auto_arima_forecast, fit_auto_arima
from fuma.methods.base import (METHOD_IDS, FittedMethod, check_levels,
                               gaussian_intervals, method_registry)
from fuma.methods.boxcox import ets_boxcox_forecast, guerrero_lambda
from fuma.methods.ets import ets_forecast, fit_ets
from fuma.methods.simple import (naive_forecast, rw_drift_forecast,
                                 snaive_forecast)
from fuma.methods.stlm import stlm_ar_forecast
from fuma.methods.theta import theta_forecast

_DISPATCH = {
    "auto-arima": auto_arima_forecast,
    "ets": ets_forecast,
    "ets-boxcox": ets_boxcox_forecast,
    "stlm-ar": stlm_ar_forecast,
    "rw-drift": rw_drift_forecast,
    "thetaf": theta_forecast,
    "naive": naive_forecast,
    "snaive": snaive_forecast,
}


def forecast(method: str, train: TimeSeries, levels: Sequence[float],
             h: int | None = None) -> dict[int, IntervalForecast]:
    """Run one pool method; every failure surfaces as ``MethodFailed``."""
    if method not in _DISPATCH:
        raise ValueError(f"unknown method {method!r}; "
                         f"known: {', '.join(METHOD_IDS)}")
    try:
        return _DISPATCH[method](train, levels, h=h)
    except MethodFailed:
        raise
    except Exception as exc:
        raise MethodFailed(method, f"{type(exc).__name__}: {exc}") from exc


def forecast_with_fallback(method: str, train: TimeSeries,
                           levels: Sequence[float], h: int | None = None,
                           ) -> tuple[dict[int, IntervalForecast], bool]:
    """Like ``forecast`` but substitutes the naive forecaster on failure.

    Returns ``(forecasts, fell_back)``.
    """
    try:
        return forecast(method, train, levels, h=h), False
    except MethodFailed:
        return forecast("naive", train, levels, h=h), True


__all__ = [
    "METHOD_IDS", "FittedMethod", "check_levels", "gaussian_intervals",
    "method_registry", "forecast", "forecast_with_fallback",
    "naive_forecast", "snaive_forecast", "rw_drift_forecast",
    "theta_forecast", "stlm_ar_forecast", "ets_forecast",
    "ets_boxcox_forecast", "auto_arima_forecast", "fit_ets",
    "fit_auto_arima", "guerrero_lambda",
]
