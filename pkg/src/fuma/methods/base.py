"""Shared plumbing for the forecasting method pool."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from fuma.core import IntervalForecast

METHOD_IDS = ("auto-arima", "ets", "ets-boxcox", "stlm-ar", "rw-drift",
              "thetaf", "naive", "snaive")

METHOD_DESCRIPTIONS = {
    "auto-arima": "seasonal ARIMA: heuristic differencing, AICc grid search, "
                  "Gaussian-likelihood refinement",
    "ets": "additive-error exponential smoothing, taxonomy selected by AICc",
    "ets-boxcox": "exponential smoothing on a Box-Cox transformed scale "
                  "(Guerrero-style lambda grid)",
    "stlm-ar": "seasonal-trend decomposition with an AR model on the "
               "seasonally adjusted series",
    "rw-drift": "random walk with drift",
    "thetaf": "average of the linear-trend extrapolation and simple "
              "exponential smoothing of the doubled-curvature line",
    "naive": "last observation repeated",
    "snaive": "most recent value of the same season repeated",
}


def method_registry() -> dict[str, str]:
    """Method id -> human description, in pool order."""
    return {mid: METHOD_DESCRIPTIONS[mid] for mid in METHOD_IDS}


@dataclass(frozen=True)
class FittedMethod:
    """Fit artifacts of one method on one training period."""

    method: str
    params: dict = field(default_factory=dict)
    sigma2: float = 0.0
    score: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise ValueError(f"residual variance must be finite and >= 0, "
                             f"got {self.sigma2}")


def check_levels(levels: Sequence[float]) -> list[float]:
    out = []
    seen = set()
    for level in levels:
        level = float(level)
        if not 0.0 < level < 1.0:
            raise ValueError(f"confidence level {level} outside (0, 1)")
        pct = int(round(100.0 * level))
        if pct in seen:
            raise ValueError(f"duplicate confidence level {level}")
        seen.add(pct)
        out.append(level)
    if not out:
        raise ValueError("need at least one confidence level")
    return out


def gaussian_intervals(point: np.ndarray, variance: np.ndarray,
                       levels: Sequence[float]) -> dict[int, IntervalForecast]:
    """Central intervals point +- z * sqrt(variance) for each level."""
    point = np.asarray(point, dtype=np.float64)
    sd = np.sqrt(np.maximum(np.asarray(variance, dtype=np.float64), 0.0))
    out: dict[int, IntervalForecast] = {}
    for level in check_levels(levels):
        alpha = 1.0 - level
        z = float(norm.ppf(1.0 - alpha / 2.0))
        fc = IntervalForecast(alpha=alpha, lower=point - z * sd,
                              upper=point + z * sd, point=point)
        out[fc.level_pct] = fc
    return out
