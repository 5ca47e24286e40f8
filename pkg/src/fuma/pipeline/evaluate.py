"""Scoring of combined and benchmark forecasts against held-out actuals.

Per frequency and overall, each model gets mean scaled interval score and
mean scaled absolute error per level, plus pooled coverage and its absolute
deviation from nominal.  Selection provenance turns into per-method
selection rates, and when several models are present their per-series
scores feed the rank-based comparison against the best model.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..core import TimeSeries
from ..errors import DataFormatError, IdMismatch, InsufficientData, ZeroDenominator
from ..metrics import acd, covered_count, mase, msis, seasonal_scale
from .forecast import ForecastRecord
from .mcb import McbResult, mcb_test

OVERALL = "overall"


@dataclass(frozen=True)
class MetricRow:
    """Mean scores of one model on one frequency group at one level."""

    model: str
    frequency: str
    level_pct: int
    n_series: int
    mean_msis: float
    mean_mase: float
    coverage: float
    acd: float


@dataclass(frozen=True)
class SelectionRow:
    """How often one method was selected within a frequency group."""

    frequency: str
    method: str
    count: int
    n_series: int
    rate: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"selection rate outside [0, 1]: {self.rate!r}")
        if self.count > self.n_series:
            raise ValueError("selection count exceeds series count")


@dataclass(frozen=True)
class EvaluationReport:
    """All evaluation tables of one run.

    Attributes
    ----------
    rows : tuple of MetricRow
        Mean metrics per (model, frequency, level); the ``overall``
        frequency row averages over every scored series.
    selection : tuple of SelectionRow
        Selection rates of the primary model at the report level.
    exclusions : mapping of str to int
        Series per frequency dropped because their score scale is
        degenerate.
    report_level : int
        Level used for selection rates and the rank comparison.
    mcb : McbResult or None
        Rank comparison across models, when at least two were supplied
        and enough series survived.
    """

    rows: tuple
    selection: tuple
    exclusions: Mapping[str, int]
    report_level: int
    mcb: McbResult | None = None

    def row(self, model: str, frequency: str, level_pct: int) -> MetricRow:
        for row in self.rows:
            if (row.model, row.frequency, row.level_pct) == \
                    (model, frequency, level_pct):
                return row
        raise KeyError(f"no row for ({model!r}, {frequency!r}, {level_pct})")

    def to_dict(self) -> dict:
        body = {
            "report_level": self.report_level,
            "exclusions": dict(self.exclusions),
            "metrics": [vars(r).copy() for r in self.rows],
            "selection": [vars(r).copy() for r in self.selection],
        }
        if self.mcb is not None:
            body["mcb"] = {
                "models": list(self.mcb.models),
                "mean_ranks": dict(self.mcb.mean_ranks),
                "half_width": self.mcb.half_width,
                "n_series": self.mcb.n_series,
                "best": self.mcb.best,
                "not_different": list(self.mcb.not_different),
            }
        return body


def _check_alignment(name: str, ids: set, reference: set) -> None:
    unmatched = sorted(ids.symmetric_difference(reference))
    if unmatched:
        raise IdMismatch([f"{name}: {sid}" for sid in unmatched])


def _score_model(records: Sequence[ForecastRecord],
                 actuals: Mapping[str, np.ndarray],
                 trains: Mapping[str, TimeSeries],
                 skip: set) -> dict:
    """Per-series scores of one model: msis/mase per level, coverage counts."""
    per_series: dict[str, dict] = {}
    for rec in records:
        if rec.series_id in skip:
            continue
        actual = actuals[rec.series_id]
        train = trains[rec.series_id]
        entry = {"frequency": rec.frequency, "msis": {}, "mase": {},
                 "covered": {}, "total": {}}
        for lv, fc in rec.intervals.items():
            if fc.horizon != len(actual):
                raise DataFormatError(
                    f"series {rec.series_id!r}: forecast horizon "
                    f"{fc.horizon} but {len(actual)} actual values")
            entry["msis"][lv] = msis(actual, fc.lower, fc.upper,
                                     train.values, train.period, fc.alpha)
            entry["mase"][lv] = mase(actual, fc.point, train.values,
                                     train.period)
            entry["covered"][lv] = covered_count(actual, fc.lower, fc.upper)
            entry["total"][lv] = fc.horizon
        per_series[rec.series_id] = entry
    return per_series


def _metric_rows(model: str, per_series: dict, levels: Sequence[int]
                 ) -> list[MetricRow]:
    groups: dict[str, list] = {}
    for entry in per_series.values():
        groups.setdefault(entry["frequency"], []).append(entry)
    rows = []
    for freq in sorted(groups) + [OVERALL]:
        entries = (per_series.values() if freq == OVERALL
                   else groups[freq])
        entries = list(entries)
        for lv in levels:
            scored = [e for e in entries if lv in e["msis"]]
            if not scored:
                continue
            covered = sum(e["covered"][lv] for e in scored)
            total = sum(e["total"][lv] for e in scored)
            rows.append(MetricRow(
                model=model, frequency=freq, level_pct=lv,
                n_series=len(scored),
                mean_msis=float(np.mean([e["msis"][lv] for e in scored])),
                mean_mase=float(np.mean([e["mase"][lv] for e in scored])),
                coverage=covered / total,
                acd=acd(covered, total, lv / 100.0)))
    return rows


def evaluate(records: Sequence[ForecastRecord],
             actuals: Mapping[str, np.ndarray],
             trains: Mapping[str, TimeSeries],
             benchmarks: Mapping[str, Sequence[ForecastRecord]] | None = None,
             model_name: str = "fuma",
             report_level: int | None = None) -> EvaluationReport:
    """Score one model (and optional benchmarks) against held-out actuals.

    Parameters
    ----------
    records : sequence of ForecastRecord
        The primary model's forecasts, one record per series.
    actuals : mapping of str to numpy.ndarray
        Held-out values per series id; ids must match ``records`` exactly.
    trains : mapping of str to TimeSeries
        The observed series the forecasts were made from (scale basis).
    benchmarks : mapping of str to sequence of ForecastRecord, optional
        Additional models to score on the same series.
    model_name : str
        Name of the primary model in the report.
    report_level : int, optional
        Level for selection rates and the rank comparison; defaults to the
        highest level present.

    Returns
    -------
    EvaluationReport
    """
    if not records:
        raise ValueError("no forecast records to evaluate")
    ids = {r.series_id for r in records}
    if len(ids) != len(records):
        raise ValueError("duplicate series ids in forecast records")
    _check_alignment("actuals", set(actuals), ids)
    missing_train = sorted(ids - set(trains))
    if missing_train:
        raise IdMismatch([f"trains: {sid}" for sid in missing_train])
    benchmarks = dict(benchmarks or {})
    for name, bench in benchmarks.items():
        _check_alignment(name, {r.series_id for r in bench}, ids)

    levels = sorted({lv for r in records for lv in r.intervals})
    if report_level is None:
        report_level = max(levels)

    # series whose scale is degenerate are excluded for every model
    skip: set = set()
    exclusions: dict[str, int] = {}
    for rec in records:
        exclusions.setdefault(rec.frequency, 0)
        try:
            seasonal_scale(trains[rec.series_id].values,
                           trains[rec.series_id].period)
        except ZeroDenominator:
            skip.add(rec.series_id)
            exclusions[rec.frequency] += 1
    if len(skip) == len(records):
        raise ValueError("every series has a degenerate score scale")

    scored = {model_name: _score_model(records, actuals, trains, skip)}
    for name, bench in benchmarks.items():
        scored[name] = _score_model(bench, actuals, trains, skip)

    rows: list[MetricRow] = []
    for name in [model_name] + sorted(benchmarks):
        rows.extend(_metric_rows(name, scored[name], levels))

    # selection rates of the primary model at the report level
    sel_counts: dict[str, dict[str, int]] = {}
    n_scored: dict[str, int] = {}
    for rec in records:
        if rec.series_id in skip or report_level not in rec.selected:
            continue
        n_scored[rec.frequency] = n_scored.get(rec.frequency, 0) + 1
        for method in rec.selected[report_level]:
            sel_counts.setdefault(rec.frequency, {})
            sel_counts[rec.frequency][method] = \
                sel_counts[rec.frequency].get(method, 0) + 1
    selection = tuple(
        SelectionRow(frequency=freq, method=method, count=count,
                     n_series=n_scored[freq], rate=count / n_scored[freq])
        for freq in sorted(sel_counts)
        for method, count in sorted(sel_counts[freq].items()))

    mcb: McbResult | None = None
    if len(scored) >= 2:
        order = sorted(scored[model_name])
        columns = {
            name: [scored[name][sid]["msis"].get(report_level, np.nan)
                   for sid in order]
            for name in scored}
        try:
            mcb = mcb_test(columns)
        except InsufficientData:
            mcb = None

    return EvaluationReport(
        rows=tuple(rows), selection=selection, exclusions=exclusions,
        report_level=report_level, mcb=mcb)


def write_report_json(report: EvaluationReport, path) -> None:
    """Write the full report as one JSON document."""
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csvs(report: EvaluationReport, directory) -> None:
    """Write flat CSV tables: metrics.csv, selection.csv, mcb.csv."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "metrics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "frequency", "level", "n_series",
                         "mean_msis", "mean_mase", "coverage", "acd"])
        for r in report.rows:
            writer.writerow([r.model, r.frequency, r.level_pct, r.n_series,
                             repr(r.mean_msis), repr(r.mean_mase),
                             repr(r.coverage), repr(r.acd)])
    with open(os.path.join(directory, "selection.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "method", "count", "n_series", "rate"])
        for s in report.selection:
            writer.writerow([s.frequency, s.method, s.count, s.n_series,
                             repr(s.rate)])
    if report.mcb is not None:
        with open(os.path.join(directory, "mcb.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "mean_rank", "half_width",
                             "not_different_from_best"])
            m = report.mcb
            for name in m.models:
                writer.writerow([
                    name, repr(m.mean_ranks[name]), repr(m.half_width),
                    name == m.best or name in m.not_different])
