"""Seasonal ARIMA with heuristic differencing and AICc grid search.

Differencing orders come first: one seasonal difference when the seasonal
component is strong, then repeated KPSS tests for the regular order (at
most two). The (p, q, P, Q) grid is fit by conditional sum of squares with
a stationarity/invertibility penalty, ranked by AICc on the common
differenced sample, and the winner is polished by exact Gaussian maximum
likelihood through a Kalman filter. Forecast variance accumulates squared
psi weights of the full integrated recursion.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from fuma import _numerics as nx
from fuma.core import IntervalForecast, TimeSeries
from fuma.errors import InsufficientData, MethodFailed
from fuma.features.compute import _kpss
from fuma.features.stl import decompose
from fuma.methods.base import FittedMethod, gaussian_intervals

KPSS_CRITICAL = 0.463
SEASONAL_STRENGTH_THRESHOLD = 0.64
MAX_P = 3
MAX_Q = 3
MAX_REGULAR_D = 2


def select_seasonal_difference(y: np.ndarray, m: int) -> int:
    """One seasonal difference when the decomposed seasonal part dominates."""
    n = len(y)
    if m <= 1 or n < 2 * m + 1:
        return 0
    try:
        dec = decompose(y, m)
    except InsufficientData:
        return 0
    detrended = dec.seasonal + dec.remainder
    var_sr = float(np.var(detrended))
    if var_sr <= 0.0:
        return 0
    strength = max(0.0, 1.0 - float(np.var(dec.remainder)) / var_sr)
    return 1 if strength >= SEASONAL_STRENGTH_THRESHOLD else 0


def select_regular_difference(x: np.ndarray) -> int:
    """Difference until the KPSS level statistic drops below its 5% value."""
    d = 0
    cur = x
    while d < MAX_REGULAR_D and len(cur) >= 6 and _kpss(cur) > KPSS_CRITICAL:
        cur = np.diff(cur)
        d += 1
    return d


def _candidate_orders(m: int) -> list[tuple[int, int, int, int]]:
    seas = (0, 1) if m > 1 else (0,)
    return [(p, q, P, Q)
            for p in range(MAX_P + 1) for q in range(MAX_Q + 1)
            for P in seas for Q in seas]


def _pack_ints(p: int, q: int, P: int, Q: int, m: int,
               use_mean: bool) -> np.ndarray:
    return np.array([nx.OBJ_ARMA_CSS, p, q, P, Q, m, int(use_mean)],
                    dtype=np.int64)


def _css_sse(w: np.ndarray, x: np.ndarray, ints: np.ndarray) -> float:
    return float(nx._obj_arma_css(x, w, ints, np.zeros(1)))


def fit_auto_arima(train: TimeSeries) -> FittedMethod:
    """Order selection, CSS grid fit and ML polish; returns the winner."""
    y = train.values
    n = train.n
    m = train.period
    if n < 10:
        raise MethodFailed("auto-arima", "need at least 10 observations")

    D = select_seasonal_difference(y, m)
    y1 = y[m:] - y[:-m] if D == 1 else y
    d = select_regular_difference(y1)
    w = np.diff(y1, n=d) if d > 0 else y1
    nw = len(w)
    use_mean = (d + D) <= 1
    sd = float(np.std(w)) + 1e-8

    best = None
    for p, q, P, Q in _candidate_orders(m):
        n_ar = p + P * m
        k = p + q + P + Q + int(use_mean) + 1
        n_eff = nw - n_ar
        if n_eff < max(8, k + 2):
            continue
        ndim = p + q + P + Q + int(use_mean)
        ints = _pack_ints(p, q, P, Q, m, use_mean)
        if ndim == 0:
            x = np.zeros(0)
            sse = _css_sse(w, x, ints)
        else:
            x0 = np.zeros(ndim)
            step = np.full(ndim, 0.1)
            if use_mean:
                x0[0] = float(w.mean())
                step[0] = 0.1 * sd
            x, sse = nx.nelder_mead(nx.OBJ_ARMA_CSS, w, ints, np.zeros(1),
                                    x0, step, 40 + 30 * ndim, 1e-9)
        if not np.isfinite(sse) or sse >= 1e9:
            continue
        # rank by the exact likelihood at the CSS optimum: it always spans
        # all of w, so models with different AR depths stay comparable
        ints_ml = ints.copy()
        ints_ml[0] = nx.OBJ_ARMA_ML
        negll = float(nx._obj_arma_ml(x, w, ints_ml, np.zeros(1)))
        if not np.isfinite(negll) or negll >= 1e9:
            continue
        if nw - k - 1 > 0:
            aicc = 2.0 * negll + 2.0 * k + 2.0 * k * (k + 1) / (nw - k - 1)
        else:
            aicc = np.inf
        key = (aicc, k, (p, q, P, Q))
        if best is None or key < best[0]:
            best = (key, (p, q, P, Q), x, ints)

    if best is None:
        raise MethodFailed("auto-arima", "no admissible candidate order")

    _, orders, x, ints = best
    p, q, P, Q = orders
    ndim = len(x)
    if ndim > 0:
        ints_ml = ints.copy()
        ints_ml[0] = nx.OBJ_ARMA_ML
        x_ml, f_ml = nx.nelder_mead(nx.OBJ_ARMA_ML, w, ints_ml, np.zeros(1),
                                    x, np.full(ndim, 0.05),
                                    30 + 25 * ndim, 1e-8)
        if np.isfinite(f_ml) and f_ml < 1e9:
            x = x_ml

    mu, phi, theta, sphi, stheta = nx._unpack_arma(x, ints)
    sse = _css_sse(w, x, ints)
    n_eff = nw - (p + P * m)
    sigma2 = float(sse) / max(n_eff, 1)
    params = {
        "order": [p, d, q], "seasonal_order": [P, D, Q], "m": m,
        "use_mean": bool(use_mean), "mu": float(mu),
        "phi": [float(v) for v in phi], "theta": [float(v) for v in theta],
        "sphi": float(sphi), "stheta": float(stheta),
    }
    return FittedMethod(method="auto-arima", params=params, sigma2=sigma2,
                        score=float(best[0][0]))


def _integrated_ar_recursion(ar_full: np.ndarray, d: int, D: int,
                             m: int) -> np.ndarray:
    """Recursion-form AR coefficients of the model including differencing."""
    poly = np.concatenate([[1.0], -np.asarray(ar_full)])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    seasonal = np.zeros(m + 1)
    seasonal[0] = 1.0
    seasonal[m] = -1.0
    for _ in range(D):
        poly = np.convolve(poly, seasonal)
    return -poly[1:]


def arima_point_and_variance(fit: FittedMethod, y: np.ndarray,
                             h: int) -> tuple[np.ndarray, np.ndarray]:
    """Forecast the differenced process, then undo the differencing."""
    p, d, q = fit.params["order"]
    P, D, Q = fit.params["seasonal_order"]
    m = fit.params["m"]
    mu = fit.params["mu"]
    phi = np.asarray(fit.params["phi"], dtype=np.float64)
    theta = np.asarray(fit.params["theta"], dtype=np.float64)
    ar_full, ma_full = nx._arma_polys(phi, theta, fit.params["sphi"],
                                      fit.params["stheta"], m)

    y1 = y[m:] - y[:-m] if D == 1 else y
    regs = [y1]
    for _ in range(d):
        regs.append(np.diff(regs[-1]))
    w = regs[-1]
    e = nx.arma_css_residuals(w, mu, ar_full, ma_full)

    nw = len(w)
    wext = np.concatenate([w, np.zeros(h)])
    eext = np.concatenate([e, np.zeros(h)])
    for t in range(nw, nw + h):
        acc = mu
        for j, a in enumerate(ar_full):
            acc += a * (wext[t - 1 - j] - mu)
        for j, b in enumerate(ma_full):
            if t - 1 - j < nw:
                acc += b * eext[t - 1 - j]
        wext[t] = acc
    fut = wext[nw:]

    for i in range(d, 0, -1):
        fut = np.cumsum(fut) + regs[i - 1][-1]
    if D == 1:
        ext = np.concatenate([y, np.zeros(h)])
        for j in range(h):
            ext[len(y) + j] = fut[j] + ext[len(y) + j - m]
        fut = ext[len(y):]

    ar_int = _integrated_ar_recursion(ar_full, d, D, m)
    psi = nx.ar_psi_weights(ar_int, ma_full, h)
    variance = fit.sigma2 * np.cumsum(psi ** 2)
    return fut, variance


def auto_arima_forecast(train: TimeSeries, levels: Sequence[float],
                        h: int | None = None) -> dict[int, IntervalForecast]:
    h = h or train.horizon
    fit = fit_auto_arima(train)
    point, variance = arima_point_and_variance(fit, train.values, h)
    return gaussian_intervals(point, variance, levels)
