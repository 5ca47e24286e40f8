"""Interval and point scoring rules: MSIS, MASE, ACD, and coverage.

All scores are scaled by the in-sample mean absolute seasonal difference of
the training data, which makes them comparable across series of different
magnitudes. The scaling denominator uses strict seasonal lags of the
training period only; the test period never enters it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroDenominator


def seasonal_scale(train: np.ndarray, m: int) -> float:
    """Mean absolute seasonal difference of the training data.

    Raises ZeroDenominator when the training data is perfectly seasonal
    (every value equal to its seasonal lag), since scaled scores are then
    undefined.
    """
    train = np.asarray(train, dtype=np.float64)
    n = len(train)
    if n < m + 2:
        raise ValueError(f"training data must have at least m + 2 = {m + 2} values")
    denom = np.sum(np.abs(train[m:] - train[:-m])) / (n - m)
    if denom == 0.0:
        raise ZeroDenominator("mean absolute seasonal difference of the training data is zero")
    return float(denom)


def msis(test, lower, upper, train, m: int, alpha: float) -> float:
    """Mean scaled interval score for one series and one confidence level.

    Width plus 2/alpha-weighted penalties for observations falling outside
    the interval, averaged over the horizon and divided by the seasonal
    scale of the training data. Boundary hits (y == bound) incur no penalty.
    """
    test = np.asarray(test, dtype=np.float64)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if not (len(test) == len(lower) == len(upper)):
        raise ValueError("test, lower, and upper must have equal length")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    scale = seasonal_scale(train, m)
    width = upper - lower
    below = np.where(test < lower, lower - test, 0.0)
    above = np.where(test > upper, test - upper, 0.0)
    numerator = np.sum(width + (2.0 / alpha) * (below + above))
    return float(numerator / len(test) / scale)


def mase(test, point, train, m: int) -> float:
    """Mean absolute scaled error of a point forecast."""
    test = np.asarray(test, dtype=np.float64)
    point = np.asarray(point, dtype=np.float64)
    if len(test) != len(point):
        raise ValueError("test and point must have equal length")
    scale = seasonal_scale(train, m)
    return float(np.mean(np.abs(test - point)) / scale)


def covered_count(test, lower, upper) -> int:
    """Number of horizon steps whose actual lies inside [lower, upper].

    Boundary hits count as covered, mirroring the strict inequalities of the
    interval-score penalty.
    """
    test = np.asarray(test, dtype=np.float64)
    inside = (test >= np.asarray(lower)) & (test <= np.asarray(upper))
    return int(np.sum(inside))


def acd(covered: int, total: int, level: float) -> float:
    """Absolute coverage difference from pooled indicator counts.

    ``level`` is the nominal coverage (e.g. 0.95); ``covered``/``total`` are
    summed over all series and horizon steps of the group being reported.
    """
    if total <= 0:
        raise ValueError("total count must be positive")
    if not 0.0 < level < 1.0:
        raise ValueError("nominal level must lie in (0, 1)")
    return float(abs(covered / total - level))


@dataclass
class ScoreRecord:
    """Scores of one (series, method) pair across the requested levels."""

    series_id: str
    method: str
    horizon: int
    mase: float
    msis: dict[int, float] = field(default_factory=dict)
    covered: dict[int, int] = field(default_factory=dict)

    def log_msis(self, level_pct: int) -> float:
        return float(np.log(self.msis[level_pct]))


@dataclass
class ScoreMatrix:
    """All per-(series, method, level) scores of a dataset, plus exclusions.

    Series whose seasonal scale is zero cannot be scored; they are recorded
    in ``excluded`` and skipped by every aggregate.
    """

    levels: list[int]
    methods: list[str]
    records: list[ScoreRecord] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)

    def add(self, record: ScoreRecord) -> None:
        self.records.append(record)

    def exclude(self, series_id: str) -> None:
        self.excluded.append(series_id)

    def series_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for rec in self.records:
            seen.setdefault(rec.series_id, None)
        return list(seen)

    def msis_column(self, method: str, level_pct: int) -> dict[str, float]:
        return {rec.series_id: rec.msis[level_pct]
                for rec in self.records if rec.method == method}

    def mean_msis(self, method: str, level_pct: int) -> float:
        vals = [rec.msis[level_pct] for rec in self.records if rec.method == method]
        return float(np.mean(vals)) if vals else float("nan")
