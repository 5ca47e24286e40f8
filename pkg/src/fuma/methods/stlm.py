"""Decomposition-based forecast: AR model on the seasonally adjusted series.

The series is decomposed, an autoregression of AICc-selected order (p <= 5)
is fitted to the seasonally adjusted part, forecast recursively, and the
periodic seasonal cycle is added back. For m = 1 the autoregression is
fitted to the raw series directly.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from fuma import _numerics as nx
from fuma.core import IntervalForecast, TimeSeries
from fuma.errors import InsufficientData, MethodFailed
from fuma.features.stl import decompose
from fuma.methods.base import gaussian_intervals


def _fit_ar(x: np.ndarray) -> tuple[float, np.ndarray, float]:
    """AICc-best autoregression with intercept; returns (c, phi, sigma2).

    Orders are compared on a common estimation sample; the winner is then
    refitted on its own full sample. Ties prefer the smaller order.
    """
    n = len(x)
    p_max = min(5, n // 4)
    start = p_max
    n_eff = n - start
    best = (np.inf, 0)
    y_common = x[start:]
    for p in range(p_max + 1):
        cols = [np.ones(n_eff)]
        for k in range(1, p + 1):
            cols.append(x[start - k: n - k])
        design = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(design, y_common, rcond=None)
        sse = float(np.sum((y_common - design @ coef) ** 2))
        kparams = p + 2
        if n_eff - kparams - 1 <= 0:
            continue
        aicc = (n_eff * np.log(max(sse, 1e-300) / n_eff) + 2 * kparams
                + 2 * kparams * (kparams + 1) / (n_eff - kparams - 1))
        if aicc < best[0] - 1e-12:
            best = (aicc, p)
    p = best[1]
    yy = x[p:]
    cols = [np.ones(n - p)]
    for k in range(1, p + 1):
        cols.append(x[p - k: n - k])
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, yy, rcond=None)
    resid = yy - design @ coef
    dof = max(len(yy) - (p + 1), 1)
    sigma2 = float(np.dot(resid, resid)) / dof
    return float(coef[0]), np.asarray(coef[1:], dtype=np.float64), sigma2


def _ar_forecast(x: np.ndarray, c: float, phi: np.ndarray,
                 h: int) -> np.ndarray:
    p = len(phi)
    hist = list(x[-p:]) if p else []
    out = np.empty(h)
    for j in range(h):
        acc = c
        for i in range(p):
            acc += phi[i] * hist[-1 - i]
        out[j] = acc
        if p:
            hist.append(acc)
    return out


def stlm_ar_forecast(train: TimeSeries, levels: Sequence[float],
                     h: int | None = None) -> dict[int, IntervalForecast]:
    h = h or train.horizon
    y = train.values
    n = len(y)
    m = train.period

    if m > 1:
        try:
            dec = decompose(y, m)
        except InsufficientData as exc:
            raise MethodFailed("stlm-ar", str(exc)) from exc
        adjusted = y - dec.seasonal
        cycle = dec.cycle
        future_seasonal = cycle[(n + np.arange(1, h + 1) - 1) % m]
    else:
        adjusted = y
        future_seasonal = np.zeros(h)

    c, phi, sigma2 = _fit_ar(adjusted)
    point = _ar_forecast(adjusted, c, phi, h) + future_seasonal
    psi = nx.ar_psi_weights(phi, np.zeros(0), h)
    variance = sigma2 * np.cumsum(psi ** 2)
    return gaussian_intervals(point, variance, levels)
