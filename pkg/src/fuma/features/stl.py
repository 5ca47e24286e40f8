"""Seasonal-trend decomposition with a periodic seasonal component.

The seasonal term is the weighted mean of the detrended values at each
within-cycle position, centered so one full cycle sums to zero; the trend
is a local linear (tricube) smoother. Two inner iterations refine trend and
seasonal against each other, and one outer pass downweights outliers with
bisquare robustness weights. The remainder is the exact difference
``y - trend - seasonal``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fuma._numerics import loess_smooth
from fuma.errors import InsufficientData


def _nextodd(x: float) -> int:
    k = int(np.ceil(x))
    return k if k % 2 == 1 else k + 1


def _seasonal_means(detrended: np.ndarray, m: int, weights: np.ndarray) -> np.ndarray:
    """Weighted per-position means, centered to sum to zero over a cycle."""
    means = np.empty(m)
    for pos in range(m):
        vals = detrended[pos::m]
        w = weights[pos::m]
        total = w.sum()
        if total > 0.0:
            means[pos] = float(np.dot(vals, w) / total)
        else:
            means[pos] = float(vals.mean())
    return means - means.mean()


def _bisquare(residuals: np.ndarray) -> np.ndarray:
    h = 6.0 * float(np.median(np.abs(residuals)))
    if h <= 0.0:
        return np.ones(len(residuals))
    u = np.abs(residuals) / h
    w = np.where(u < 1.0, (1.0 - u * u) ** 2, 0.0)
    return w


@dataclass(frozen=True)
class Decomposition:
    """Additive components with ``trend + seasonal + remainder == y``."""

    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    period: int

    @property
    def cycle(self) -> np.ndarray:
        """The m seasonal values by within-cycle position (empty for m=1)."""
        if self.period == 1:
            return np.zeros(0)
        return self.seasonal[: self.period].copy()


def decompose(values, m: int, inner_iterations: int = 2,
              robust_passes: int = 1) -> Decomposition:
    """Decompose a series into trend, periodic seasonal, and remainder.

    For m == 1 the seasonal component is identically zero and only the
    trend smoother runs. Seasonal decomposition needs at least two full
    cycles plus one point (n >= 2m + 1).
    """
    y = np.asarray(values, dtype=np.float64)
    n = len(y)
    if m > 1 and n < 2 * m + 1:
        raise InsufficientData(
            f"need at least 2m + 1 = {2 * m + 1} points for seasonal "
            f"decomposition, have {n}")

    if m == 1:
        window = _nextodd(max(7, n // 3))
    else:
        window = _nextodd(1.5 * m)

    weights = np.ones(n)
    trend = np.zeros(n)
    seasonal = np.zeros(n)
    positions = np.arange(n) % m

    for outer in range(robust_passes + 1):
        for _ in range(inner_iterations):
            if m > 1:
                cycle = _seasonal_means(y - trend, m, weights)
                seasonal = cycle[positions]
            trend = loess_smooth(y - seasonal, weights, window)
        if outer < robust_passes:
            weights = _bisquare(y - trend - seasonal)

    remainder = y - trend - seasonal
    return Decomposition(trend=trend, seasonal=seasonal,
                         remainder=remainder, period=m)
