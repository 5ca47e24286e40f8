"""Training phase: score the pool on reference series, fit the error models.

Every reference series is split into a training part and a held-out test
window.  The full method pool forecasts the window, each method's interval
score is recorded per confidence level, and features of the training part
become the regressors of one penalized additive error model per
(method, level).  Fitted error predictions then drive the combination
threshold search, once per combination mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Mapping, Sequence

import numpy as np

from ..combiner import (DEFAULT_TR_GRID, COMBINATION_MODES, ReferenceCase,
                        ThresholdResult, search_threshold)
from ..core import FREQUENCY_BY_PERIOD, IntervalForecast, TimeSeries, split
from ..errors import FumaError, TrainingAborted
from ..features.compute import compute_features
from ..features.registry import FEATURE_NAMES, registry_hash
from ..gam import FitDiagnostics, fit_gam, predict_matrix
from ..methods import forecast_with_fallback
from ..methods.base import METHOD_IDS
from ..metrics import msis
from .ensemble import TrainedEnsemble
from .parallel import map_ordered

MAX_FAILURE_FRACTION = 0.2


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one training run.

    Attributes
    ----------
    levels : tuple of int
        Confidence levels (percent) to train error models for.
    search_level : int
        The level whose intervals drive the threshold search; must be one
        of ``levels``.
    grid : tuple of float
        Candidate combination thresholds.
    seed : int or None
        Echoed into the ensemble for provenance; training itself is
        deterministic given its input series.
    """

    levels: tuple = (80, 95)
    search_level: int = 95
    grid: tuple = DEFAULT_TR_GRID
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("need at least one confidence level")
        for lv in self.levels:
            if not 0 < lv < 100:
                raise ValueError(f"levels are percentages in (0, 100), got {lv}")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError("levels must be distinct")
        if self.search_level not in self.levels:
            raise ValueError(
                f"search level {self.search_level} not in levels {self.levels}")


@dataclass(frozen=True)
class SeriesOutcome:
    """Per-series result of the scoring pass (or its failure reason)."""

    series_id: str
    period: int
    error: str | None = None
    features: np.ndarray | None = None
    fallbacks: tuple = ()
    log_scores: Mapping[int, Mapping[str, float]] = field(default_factory=dict)
    search_forecasts: Mapping[str, IntervalForecast] = field(default_factory=dict)
    train_values: np.ndarray | None = None
    test_values: np.ndarray | None = None


@dataclass(frozen=True)
class TrainResult:
    """A trained ensemble plus fit diagnostics and per-series exclusions."""

    ensemble: TrainedEnsemble
    diagnostics: Mapping[tuple, FitDiagnostics]
    exclusions: tuple


def score_series(series: TimeSeries, levels: tuple, search_level: int
                 ) -> SeriesOutcome:
    """Split one series, run the pool, and score every (method, level)."""
    try:
        sp = split(series)
        feats = compute_features(sp.train.values, series.period).values
        fractions = [lv / 100.0 for lv in levels]
        fallbacks = []
        per_method: dict[str, dict[int, IntervalForecast]] = {}
        for method in METHOD_IDS:
            by_level, fell_back = forecast_with_fallback(
                method, sp.train, fractions)
            per_method[method] = by_level
            if fell_back:
                fallbacks.append(method)
        log_scores: dict[int, dict[str, float]] = {}
        for lv in levels:
            log_scores[lv] = {}
            for method in METHOD_IDS:
                fc = per_method[method][lv]
                value = msis(sp.test, fc.lower, fc.upper, sp.train.values,
                             series.period, fc.alpha)
                log_scores[lv][method] = (
                    math.log(value) if value > 0.0 else float("-inf"))
        return SeriesOutcome(
            series_id=series.id, period=series.period, features=feats,
            fallbacks=tuple(fallbacks), log_scores=log_scores,
            search_forecasts={m: per_method[m][search_level]
                              for m in METHOD_IDS},
            train_values=sp.train.values, test_values=sp.test)
    except FumaError as exc:
        return SeriesOutcome(series_id=series.id, period=series.period,
                             error=f"{type(exc).__name__}: {exc}")


def train(series: Sequence[TimeSeries], config: TrainConfig | None = None,
          jobs: int = 1) -> TrainResult:
    """Train the full ensemble on a reference set.

    Parameters
    ----------
    series : sequence of TimeSeries
        The reference set; every frequency present must keep at least 80%
        of its series through scoring.
    config : TrainConfig
        Levels, search level, and threshold grid.
    jobs : int
        Worker processes for the per-series scoring pass.

    Returns
    -------
    TrainResult
        The ensemble, per-model fit diagnostics, and excluded series.
    """
    config = config or TrainConfig()
    if not series:
        raise ValueError("need at least one reference series")
    levels = tuple(sorted(config.levels))
    worker = partial(score_series, levels=levels,
                     search_level=config.search_level)
    outcomes = map_ordered(worker, series, jobs)

    by_freq_total: dict[str, int] = {}
    by_freq_failed: dict[str, int] = {}
    usable: list[SeriesOutcome] = []
    exclusions: list[tuple] = []
    for out in outcomes:
        freq = FREQUENCY_BY_PERIOD[out.period]
        by_freq_total[freq] = by_freq_total.get(freq, 0) + 1
        if out.error is not None:
            by_freq_failed[freq] = by_freq_failed.get(freq, 0) + 1
            exclusions.append((out.series_id, out.error))
        else:
            usable.append(out)
    for freq, total in by_freq_total.items():
        failed = by_freq_failed.get(freq, 0)
        if failed > MAX_FAILURE_FRACTION * total:
            raise TrainingAborted(
                f"{failed} of {total} {freq} series failed scoring "
                f"(limit {MAX_FAILURE_FRACTION:.0%}); first errors: "
                f"{[e for _, e in exclusions[:3]]}")

    X = np.vstack([out.features for out in usable])
    models = {}
    diagnostics = {}
    for method in METHOD_IDS:
        for lv in levels:
            y = np.asarray([out.log_scores[lv][method] for out in usable])
            model, diag = fit_gam(X, y, method=method, level_pct=lv,
                                  feature_names=FEATURE_NAMES)
            models[(method, lv)] = model
            diagnostics[(method, lv)] = diag

    fitted_columns = {
        method: predict_matrix(models[(method, config.search_level)], X)
        for method in METHOD_IDS}
    cases = []
    for i, out in enumerate(usable):
        cases.append(ReferenceCase(
            series_id=out.series_id, train=out.train_values,
            period=out.period, test=out.test_values,
            forecasts=dict(out.search_forecasts),
            fitted={m: float(fitted_columns[m][i]) for m in METHOD_IDS}))
    thresholds: dict[str, ThresholdResult] = {}
    for mode in COMBINATION_MODES:
        thresholds[mode] = search_threshold(
            cases, grid=config.grid, mode=mode,
            level_pct=config.search_level)

    counts = {freq: by_freq_total[freq] - by_freq_failed.get(freq, 0)
              for freq in sorted(by_freq_total)}
    ensemble = TrainedEnsemble(
        registry_hash=registry_hash(),
        methods=METHOD_IDS,
        levels=levels,
        models=models,
        thresholds=thresholds,
        config={
            "seed": config.seed,
            "levels": list(levels),
            "search_level": config.search_level,
            "grid": [float(tr) for tr in config.grid],
            "counts": counts,
            "excluded": {freq: by_freq_failed.get(freq, 0)
                         for freq in sorted(by_freq_total)},
        },
    )
    return TrainResult(ensemble=ensemble, diagnostics=diagnostics,
                       exclusions=tuple(exclusions))
