"""Additive-error exponential smoothing with AICc taxonomy selection.

Candidates combine {none, additive, additive damped} trend with {none,
additive} seasonality. Initial states are fixed heuristically (seasonal
indices from classical decomposition, level and trend from a line through
the first deseasonalized points); only the smoothing weights are optimized.
The AICc parameter count is therefore the number of smoothing weights plus
one for the innovation variance. Forecast variance uses the analytic
h-step formula for this additive class.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from fuma import _numerics as nx
from fuma._initstate import heuristic_states
from fuma.core import IntervalForecast, TimeSeries
from fuma.methods.base import FittedMethod, gaussian_intervals

# name -> (trend_code, seasonal_code); codes: 0 none, 1 additive, 2 damped
TAXONOMY = {
    "ANN": (0, 0),
    "AAN": (1, 0),
    "AAdN": (2, 0),
    "ANA": (0, 1),
    "AAA": (1, 1),
    "AAdA": (2, 1),
}


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


def _natural_params(x: np.ndarray, trend_code: int,
                    seas_code: int) -> tuple[float, float, float, float]:
    lo, hi = 1e-4, 0.9999
    alpha = lo + (hi - lo) * _sigmoid(x[0])
    beta, phi, gamma = 0.0, 1.0, 0.0
    i = 1
    if trend_code > 0:
        beta = alpha * _sigmoid(x[i])
        i += 1
        if trend_code == 2:
            phi = 0.8 + 0.18 * _sigmoid(x[i])
            i += 1
    if seas_code == 1:
        gamma = (1.0 - alpha) * _sigmoid(x[i])
    return alpha, beta, phi, gamma


def _n_smoothing(trend_code: int, seas_code: int) -> int:
    return 1 + (1 if trend_code > 0 else 0) + (1 if trend_code == 2 else 0) \
        + (1 if seas_code == 1 else 0)


def fit_ets(train: TimeSeries, candidates: Sequence[str] | None = None) -> FittedMethod:
    """Fit every admissible taxonomy member and keep the AICc winner.

    Seasonal candidates need n >= 2m + 2. AICc ties go to the model with
    fewer parameters (then alphabetical name, for determinism).
    """
    y = train.values
    n = train.n
    m = train.period
    names = list(candidates) if candidates is not None else list(TAXONOMY)
    # fits at the float noise floor count as exact, so that the parameter
    # penalty (not 1e-30-scale SSE jitter) decides between perfect fits
    sse_floor = n * (1e-12 * max(1.0, float(np.max(np.abs(y))))) ** 2
    best = None

    for name in sorted(names):
        trend_code, seas_code = TAXONOMY[name]
        if seas_code == 1 and (m <= 1 or n < 2 * m + 2):
            continue
        m_eff = m if seas_code == 1 else 1
        l0, b0, s0 = heuristic_states(y, m_eff, seasonal=seas_code == 1)
        floats = np.concatenate([[l0, b0], s0[:m_eff]])
        ints = np.array([nx.OBJ_ETS, m_eff, trend_code, seas_code, 0, 0, 0],
                        dtype=np.int64)
        ndim = _n_smoothing(trend_code, seas_code)
        x, sse = nx.nelder_mead(nx.OBJ_ETS, y, ints, floats, np.zeros(ndim),
                                np.full(ndim, 1.0), 200 * ndim, 1e-10)
        k = ndim + 1
        loglik = -0.5 * n * (np.log(2.0 * np.pi * max(sse, sse_floor) / n)
                             + 1.0)
        if n - k - 1 > 0:
            aicc = -2.0 * loglik + 2.0 * k + 2.0 * k * (k + 1) / (n - k - 1)
        else:
            aicc = np.inf
        key = (aicc, k, name)
        if best is None or key < best[0]:
            best = (key, name, trend_code, seas_code, m_eff, x, sse,
                    (l0, b0, s0[:m_eff]))

    _, name, trend_code, seas_code, m_eff, x, sse, init = best
    alpha, beta, phi, gamma = _natural_params(x, trend_code, seas_code)
    l0, b0, s0 = init
    _, level, trend, season = nx.ets_filter(y, m_eff, trend_code, seas_code,
                                            alpha, beta, phi, gamma,
                                            l0, b0, s0.copy())
    # seasonal values rotated to future order: entry j applies at step j+1
    future = season[(n + np.arange(m_eff)) % m_eff] if seas_code == 1 \
        else np.zeros(1)
    nsm = _n_smoothing(trend_code, seas_code)
    sigma2 = float(sse) / max(n - nsm, 1)
    params = {
        "model": name,
        "alpha": alpha, "beta": beta, "phi": phi, "gamma": gamma,
        "level": float(level), "trend": float(trend),
        "season_future": [float(v) for v in future],
        "m": m_eff,
    }
    return FittedMethod(method="ets", params=params, sigma2=sigma2,
                        score=float(best[0][0]))


def _phi_sum(trend_code: int, phi: float, steps: np.ndarray) -> np.ndarray:
    if trend_code == 0:
        return np.zeros(len(steps))
    if trend_code == 1:
        return steps.astype(np.float64)
    return phi * (1.0 - phi ** steps) / (1.0 - phi)


def ets_point_and_variance(fit: FittedMethod,
                           h: int) -> tuple[np.ndarray, np.ndarray]:
    """Analytic h-step point forecasts and forecast variances."""
    p = fit.params
    trend_code, seas_code = TAXONOMY[p["model"]]
    m = p["m"]
    steps = np.arange(1, h + 1)
    future = np.asarray(p["season_future"])
    seasonal = future[(steps - 1) % m] if seas_code == 1 else np.zeros(h)
    point = p["level"] + _phi_sum(trend_code, p["phi"], steps) * p["trend"] \
        + seasonal

    # v_h = sigma^2 (1 + sum_{j<h} c_j^2), c_j = alpha + beta*phisum(j)
    # + gamma*[m divides j]
    j = np.arange(1, h)
    c = p["alpha"] + p["beta"] * _phi_sum(trend_code, p["phi"], j)
    if seas_code == 1:
        c = c + p["gamma"] * (j % m == 0)
    csq = np.concatenate([[0.0], np.cumsum(c ** 2)])
    variance = fit.sigma2 * (1.0 + csq)
    return point, variance


def ets_forecast(train: TimeSeries, levels: Sequence[float],
                 h: int | None = None,
                 candidates: Sequence[str] | None = None,
                 ) -> dict[int, IntervalForecast]:
    h = h or train.horizon
    fit = fit_ets(train, candidates)
    point, variance = ets_point_and_variance(fit, h)
    return gaussian_intervals(point, variance, levels)
