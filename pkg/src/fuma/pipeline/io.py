"""File formats: series CSV, forecast CSV, provenance JSON, export tables.

All floating-point values are written with ``repr``, the shortest decimal
string that parses back to the identical double, so files are byte-stable
across runs and round-trip without precision loss.
"""

from __future__ import annotations

import csv
import json
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..combiner import ThresholdResult
from ..core import (HORIZON_BY_FREQUENCY, PERIOD_BY_FREQUENCY, IntervalForecast,
                    TimeSeries)
from ..errors import DataFormatError

SERIES_HEADER = ["id", "frequency", "index", "value"]
FORECAST_HEADER = ["id", "level", "step", "lower", "point", "upper"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(f"{where}: not a number: {text!r}") from None


def read_series_csv(path) -> list[TimeSeries]:
    """Read long-form series rows ``id,frequency,index,value``.

    Rows may appear in any order; each id's rows are sorted by index.  The
    horizon is implied by the frequency.
    """
    groups: dict[str, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SERIES_HEADER:
            raise DataFormatError(
                f"{path}: expected header {','.join(SERIES_HEADER)}, "
                f"got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataFormatError(f"{path}:{lineno}: expected 4 columns")
            sid, freq, index, value = row
            if freq not in PERIOD_BY_FREQUENCY:
                raise DataFormatError(
                    f"{path}:{lineno}: unknown frequency {freq!r}")
            try:
                idx = int(index)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: index must be an integer") from None
            g = groups.setdefault(sid, {"frequency": freq, "rows": {}})
            if g["frequency"] != freq:
                raise DataFormatError(
                    f"{path}:{lineno}: series {sid!r} changes frequency")
            if idx in g["rows"]:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate index {idx} for {sid!r}")
            g["rows"][idx] = _parse_float(value, f"{path}:{lineno}")
    out = []
    for sid, g in groups.items():
        freq = g["frequency"]
        values = [g["rows"][i] for i in sorted(g["rows"])]
        try:
            out.append(TimeSeries(
                id=sid, values=np.asarray(values), period=PERIOD_BY_FREQUENCY[freq],
                horizon=HORIZON_BY_FREQUENCY[freq]))
        except Exception as exc:
            raise DataFormatError(f"{path}: series {sid!r}: {exc}") from exc
    if not out:
        raise DataFormatError(f"{path}: no series rows")
    return out


def write_series_csv(path, series: Iterable[TimeSeries],
                     start_index: Mapping[str, int] | None = None) -> None:
    """Write series in long form; indices start at 0 unless overridden."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for s in series:
            base = (start_index or {}).get(s.id, 0)
            for i, v in enumerate(s.values):
                writer.writerow([s.id, s.frequency, base + i, _fmt(v)])


def read_actuals_csv(path) -> dict[str, np.ndarray]:
    """Read held-out actuals (same long form), keyed by series id."""
    return {s.id: s.values for s in read_series_csv(path)}


def write_forecast_csv(path, forecasts: Mapping[str, Mapping[int, IntervalForecast]]
                       ) -> None:
    """Write ``id,level,step,lower,point,upper`` rows.

    ``forecasts`` maps series id to a per-level mapping.  Rows are emitted
    in the mapping's id order, then by level, then by step.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FORECAST_HEADER)
        for sid, by_level in forecasts.items():
            for level in sorted(by_level):
                fc = by_level[level]
                for step in range(fc.horizon):
                    writer.writerow([
                        sid, level, step + 1, _fmt(fc.lower[step]),
                        _fmt(fc.point[step]), _fmt(fc.upper[step])])


def read_forecast_csv(path) -> dict[str, dict[int, IntervalForecast]]:
    """Read a forecast CSV back into per-series, per-level forecasts."""
    rows: dict[str, dict[int, dict[int, tuple]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FORECAST_HEADER:
            raise DataFormatError(
                f"{path}: expected header {','.join(FORECAST_HEADER)}, "
                f"got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise DataFormatError(f"{path}:{lineno}: expected 6 columns")
            sid, level, step, lower, point, upper = row
            where = f"{path}:{lineno}"
            try:
                lv, st = int(level), int(step)
            except ValueError:
                raise DataFormatError(
                    f"{where}: level and step must be integers") from None
            rows.setdefault(sid, {}).setdefault(lv, {})[st] = (
                _parse_float(lower, where), _parse_float(point, where),
                _parse_float(upper, where))
    out: dict[str, dict[int, IntervalForecast]] = {}
    for sid, by_level in rows.items():
        out[sid] = {}
        for lv, steps in by_level.items():
            expected = list(range(1, len(steps) + 1))
            if sorted(steps) != expected:
                raise DataFormatError(
                    f"{path}: series {sid!r} level {lv}: steps must be "
                    f"1..{len(steps)} without gaps")
            tab = np.asarray([steps[s] for s in expected])
            try:
                out[sid][lv] = IntervalForecast(
                    alpha=1.0 - lv / 100.0, lower=tab[:, 0], upper=tab[:, 2],
                    point=tab[:, 1])
            except Exception as exc:
                raise DataFormatError(
                    f"{path}: series {sid!r} level {lv}: {exc}") from exc
    return out


def write_provenance_json(path, mode: str, records) -> None:
    """Write per-series selection provenance (weights, subsets, thresholds)."""
    body = {"mode": mode, "series": {}}
    for rec in records:
        body["series"][rec.series_id] = {
            "frequency": rec.frequency,
            "fallbacks": sorted(rec.fallbacks),
            "threshold": {str(lv): _fmt(tr) for lv, tr in rec.threshold.items()},
            "selected": {str(lv): list(sub) for lv, sub in rec.selected.items()},
            "weights": {
                str(lv): {k: _fmt(w) for k, w in ws.items()}
                for lv, ws in rec.weights.items()},
        }
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_provenance_json(path) -> dict:
    """Read provenance back; float strings are parsed, keys become ints."""
    with open(path) as fh:
        try:
            body = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    for field in ("mode", "series"):
        if field not in body:
            raise DataFormatError(f"{path}: missing {field!r}")
    series = {}
    for sid, entry in body["series"].items():
        series[sid] = {
            "frequency": entry["frequency"],
            "fallbacks": tuple(entry["fallbacks"]),
            "threshold": {int(lv): float(tr)
                          for lv, tr in entry["threshold"].items()},
            "selected": {int(lv): tuple(sub)
                         for lv, sub in entry["selected"].items()},
            "weights": {int(lv): {k: float(w) for k, w in ws.items()}
                        for lv, ws in entry["weights"].items()},
        }
    return {"mode": body["mode"], "series": series}


def write_threshold_path_csv(path, thresholds: Mapping[str, ThresholdResult]
                             ) -> None:
    """Write the search path: ``frequency,mode,tr,mean_msis`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "mode", "tr", "mean_msis"])
        for mode in sorted(thresholds):
            for freq, tr, score in thresholds[mode].path:
                writer.writerow([freq, mode, _fmt(tr), _fmt(score)])


def write_effects_csv(path, rows: Sequence[tuple]) -> None:
    """Write partial-effect grids: ``method,level,feature,x,effect`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "level", "feature", "x", "effect"])
        for method, level, feature, x, effect in rows:
            writer.writerow([method, level, feature, _fmt(x), _fmt(effect)])
