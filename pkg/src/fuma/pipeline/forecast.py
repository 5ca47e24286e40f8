"""Testing phase: select methods per series from predicted errors, combine.

Features of the incoming series feed the per-(method, level) error models;
predicted errors become weights, the stored threshold picks the method
subset, and only the selected methods are actually fitted.  The combined
interval is a convex combination of the member bounds with a midpoint
point forecast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Mapping, Sequence

import numpy as np

from ..combiner import (CombinationWeights, adjusted_softmax, combine_intervals,
                        select_by_threshold)
from ..core import IntervalForecast, TimeSeries
from ..features.compute import compute_features
from ..gam import predict_gam
from ..methods import forecast_with_fallback
from ..methods.base import METHOD_IDS
from .ensemble import TrainedEnsemble
from .parallel import map_ordered

FORECAST_MODES = ("mean", "weighted", "all-weighted")

AVERAGE_BENCHMARK = "average"

_UNIFORM_POOL = CombinationWeights(
    weights={m: 1.0 / len(METHOD_IDS) for m in METHOD_IDS})


@dataclass(frozen=True)
class ForecastRecord:
    """A combined forecast for one series plus its selection provenance.

    Attributes
    ----------
    series_id, frequency : str
        Identity of the series.
    intervals : mapping of int to IntervalForecast
        Combined forecast per confidence level.
    threshold : mapping of int to float
        Threshold applied at each level.
    selected : mapping of int to tuple of str
        Method subset combined at each level.
    weights : mapping of int to mapping of str to float
        Combination weights per level, renormalized over the subset
        (they sum to 1).
    fallbacks : tuple of str
        Methods that failed on this series and were replaced by the naive
        forecaster.
    """

    series_id: str
    frequency: str
    intervals: Mapping[int, IntervalForecast]
    threshold: Mapping[int, float] = field(default_factory=dict)
    selected: Mapping[int, tuple] = field(default_factory=dict)
    weights: Mapping[int, Mapping[str, float]] = field(default_factory=dict)
    fallbacks: tuple = ()


def _subset_shares(weights: CombinationWeights, subset: Sequence[str],
                   mode: str) -> dict[str, float]:
    if mode == "weighted":
        raw = np.asarray([weights.weights[k] for k in subset])
    else:
        raw = np.ones(len(subset))
    share = raw / raw.sum()
    return dict(zip(subset, share.tolist()))


def forecast_series(series: TimeSeries, ensemble: TrainedEnsemble,
                    mode: str = "weighted", levels: Sequence[int] | None = None,
                    ) -> ForecastRecord:
    """Forecast one series with the trained ensemble.

    Parameters
    ----------
    series : TimeSeries
        The full observed series; the forecast extends past its end by
        the series horizon.
    ensemble : TrainedEnsemble
        Trained error models and thresholds.
    mode : str
        ``weighted``, ``mean``, or ``all-weighted`` (weights without any
        selection, the threshold forced to 0).
    levels : sequence of int, optional
        Levels to forecast; defaults to all trained levels.

    Returns
    -------
    ForecastRecord
    """
    if mode not in FORECAST_MODES:
        raise ValueError(f"mode must be one of {FORECAST_MODES}, got {mode!r}")
    levels = tuple(levels) if levels is not None else ensemble.levels
    missing = [lv for lv in levels if lv not in ensemble.levels]
    if missing:
        raise ValueError(
            f"no error models trained for levels {missing}; "
            f"available: {list(ensemble.levels)}")
    if mode == "all-weighted":
        eff_mode, tr = "weighted", 0.0
    else:
        eff_mode, tr = mode, ensemble.threshold_for(series.frequency, mode)

    feats = compute_features(series.values, series.period).values
    per_level_weights: dict[int, CombinationWeights] = {}
    per_level_subset: dict[int, tuple] = {}
    needed: list[str] = []
    for lv in levels:
        predicted = {
            m: predict_gam(ensemble.models[(m, lv)], feats)
            for m in ensemble.methods}
        weights = adjusted_softmax(predicted)
        subset = select_by_threshold(weights, tr)
        per_level_weights[lv] = weights
        per_level_subset[lv] = subset
        for m in subset:
            if m not in needed:
                needed.append(m)

    fractions = [lv / 100.0 for lv in levels]
    member: dict[str, dict[int, IntervalForecast]] = {}
    fallbacks = []
    for m in needed:
        by_level, fell_back = forecast_with_fallback(m, series, fractions)
        member[m] = by_level
        if fell_back:
            fallbacks.append(m)

    intervals = {}
    shares = {}
    for lv in levels:
        subset = per_level_subset[lv]
        members_at_level = {m: member[m][lv] for m in subset}
        intervals[lv] = combine_intervals(
            members_at_level, per_level_weights[lv], subset, eff_mode)
        shares[lv] = _subset_shares(per_level_weights[lv], subset, eff_mode)
    return ForecastRecord(
        series_id=series.id, frequency=series.frequency, intervals=intervals,
        threshold={lv: tr for lv in levels}, selected=per_level_subset,
        weights=shares, fallbacks=tuple(fallbacks))


def run_forecast(ensemble: TrainedEnsemble, series: Sequence[TimeSeries],
                 mode: str = "weighted", levels: Sequence[int] | None = None,
                 jobs: int = 1) -> list[ForecastRecord]:
    """Forecast many series, preserving input order."""
    worker = partial(forecast_series, ensemble=ensemble, mode=mode,
                     levels=levels)
    return map_ordered(worker, series, jobs)


def _pool_worker(series: TimeSeries, levels: tuple) -> dict[str, ForecastRecord]:
    fractions = [lv / 100.0 for lv in levels]
    out: dict[str, ForecastRecord] = {}
    member: dict[str, dict[int, IntervalForecast]] = {}
    for m in METHOD_IDS:
        by_level, fell_back = forecast_with_fallback(m, series, fractions)
        member[m] = by_level
        out[m] = ForecastRecord(
            series_id=series.id, frequency=series.frequency,
            intervals=by_level, fallbacks=(m,) if fell_back else ())
    averaged = {
        lv: combine_intervals({m: member[m][lv] for m in METHOD_IDS},
                              _UNIFORM_POOL, METHOD_IDS, mode="mean")
        for lv in levels}
    out[AVERAGE_BENCHMARK] = ForecastRecord(
        series_id=series.id, frequency=series.frequency, intervals=averaged)
    return out


def run_pool(series: Sequence[TimeSeries], levels: Sequence[int],
             jobs: int = 1) -> dict[str, list[ForecastRecord]]:
    """Fit the full pool on every series: benchmark forecasts.

    Returns one record list per method, plus ``"average"``: the equal-weight
    combination of the whole pool.
    """
    levels = tuple(levels)
    worker = partial(_pool_worker, levels=levels)
    per_series = map_ordered(worker, series, jobs)
    names = list(METHOD_IDS) + [AVERAGE_BENCHMARK]
    return {name: [row[name] for row in per_series] for name in names}
