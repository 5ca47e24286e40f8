"""Core time-series containers and the train/test split.

All containers are immutable after construction (frozen dataclasses holding
read-only numpy arrays), so they can be shared freely across worker
processes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import LevelMismatch, SeriesTooShort

VALID_PERIODS = (1, 4, 12)

FREQUENCY_BY_PERIOD = {1: "yearly", 4: "quarterly", 12: "monthly"}
PERIOD_BY_FREQUENCY = {v: k for k, v in FREQUENCY_BY_PERIOD.items()}
HORIZON_BY_FREQUENCY = {"yearly": 6, "quarterly": 8, "monthly": 18}


def _readonly(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A univariate series with its seasonal period and forecast horizon.

    Timestamps are implicit integer indices; only the period ``m`` matters
    for seasonal computations.
    """

    id: str
    values: np.ndarray
    period: int
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.period not in VALID_PERIODS:
            raise ValueError(f"period must be one of {VALID_PERIODS}, got {self.period}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"series {self.id!r} contains non-finite values")
        if len(self.values) < self.period + 2:
            raise SeriesTooShort(
                f"series {self.id!r} has {len(self.values)} observations; "
                f"need at least period + 2 = {self.period + 2}"
            )

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def frequency(self) -> str:
        return FREQUENCY_BY_PERIOD[self.period]

    def with_values(self, values, id: str | None = None) -> "TimeSeries":
        return TimeSeries(id=id or self.id, values=values,
                          period=self.period, horizon=self.horizon)


@dataclass(frozen=True)
class SplitSeries:
    """A series separated into a training period and the held-out test tail."""

    train: TimeSeries
    test: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "test", _readonly(self.test))
        if len(self.test) != self.train.horizon:
            raise ValueError("test length must equal the forecast horizon")


def split(series: TimeSeries) -> SplitSeries:
    """Hold out the final ``horizon`` values of a series as its test period.

    The training part keeps the same id, period, and horizon; concatenating
    train and test reproduces the input exactly.
    """
    h, m = series.horizon, series.period
    if series.n < h + m + 2:
        raise SeriesTooShort(
            f"series {series.id!r}: need at least horizon + period + 2 = "
            f"{h + m + 2} observations to split, have {series.n}"
        )
    train = series.with_values(series.values[: series.n - h])
    return SplitSeries(train=train, test=series.values[series.n - h:])


@dataclass(frozen=True)
class IntervalForecast:
    """Central prediction-interval bounds plus the point path for one level.

    ``alpha`` is the tail mass: a 95% interval has ``alpha = 0.05``.
    """

    alpha: float
    lower: np.ndarray
    upper: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _readonly(self.lower))
        object.__setattr__(self, "upper", _readonly(self.upper))
        object.__setattr__(self, "point", _readonly(self.point))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not (len(self.lower) == len(self.upper) == len(self.point)):
            raise ValueError("lower, upper, and point must share one horizon")
        for name in ("lower", "upper", "point"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")
        if np.any(self.lower > self.upper + 1e-12):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def horizon(self) -> int:
        return len(self.point)

    @property
    def level_pct(self) -> int:
        return int(round(100.0 * (1.0 - self.alpha)))


@dataclass(frozen=True)
class ForecastBundle:
    """Per-method interval forecasts for one series, keyed by level percent.

    Every method must carry the same level set and horizon.
    """

    series_id: str
    forecasts: Mapping[str, Mapping[int, IntervalForecast]] = field(default_factory=dict)

    def __post_init__(self):
        methods = list(self.forecasts)
        if not methods:
            return
        ref_levels = sorted(self.forecasts[methods[0]])
        ref_h = None
        for method in methods:
            by_level = self.forecasts[method]
            if sorted(by_level) != ref_levels:
                raise LevelMismatch(
                    f"method {method!r} carries levels {sorted(by_level)}, "
                    f"expected {ref_levels}")
            for fc in by_level.values():
                if ref_h is None:
                    ref_h = fc.horizon
                elif fc.horizon != ref_h:
                    raise ValueError("all forecasts in a bundle must share one horizon")

    @property
    def methods(self) -> list[str]:
        return list(self.forecasts)

    @property
    def levels(self) -> list[int]:
        if not self.forecasts:
            return []
        first = next(iter(self.forecasts.values()))
        return sorted(first)
