"""Command-line interface: generate, train, forecast, evaluate, export.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
inconsistent inputs), 3 systemic training failure (too many series of one
frequency failed scoring).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..errors import FumaError, IdMismatch, TrainingAborted
from ..gam import partial_effect
from ..generator import LengthSampler, generate_one
from .ensemble import load_ensemble, save_ensemble
from .evaluate import evaluate, write_report_csvs, write_report_json
from .forecast import (FORECAST_MODES, ForecastRecord, run_forecast, run_pool)
from .io import (read_actuals_csv, read_forecast_csv, read_provenance_json,
                 read_series_csv, write_effects_csv, write_forecast_csv,
                 write_provenance_json, write_series_csv,
                 write_threshold_path_csv)
from .train import TrainConfig, train


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _levels_type(text: str) -> tuple:
    try:
        levels = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"levels must be comma-separated integers, got {text!r}") from None
    for lv in levels:
        if not 0 < lv < 100:
            raise argparse.ArgumentTypeError(
                f"levels are percentages in (0, 100), got {lv}")
    if len(set(levels)) != len(levels):
        raise argparse.ArgumentTypeError("levels must be distinct")
    return levels


def _benchmark_type(text: str) -> tuple:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(
            f"benchmarks are NAME=PATH pairs, got {text!r}")
    return name, path


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _count_type(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def build_parser() -> _Parser:
    parser = _Parser(prog="fuma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate reference series")
    p.add_argument("--out", required=True, help="series CSV to write")
    p.add_argument("--actuals-out",
                   help="also hold out each series' final horizon here")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--start", type=_count_type, default=0,
                   help="first series index (for disjoint follow-up sets)")
    p.add_argument("--yearly", type=_count_type, default=0)
    p.add_argument("--quarterly", type=_count_type, default=0)
    p.add_argument("--monthly", type=_count_type, default=0)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="train the ensemble on reference series")
    p.add_argument("--series", required=True, help="series CSV to read")
    p.add_argument("--out", required=True, help="ensemble JSON to write")
    p.add_argument("--levels", type=_levels_type, default=(80, 95))
    p.add_argument("--search-level", type=int, default=95)
    p.add_argument("--seed", type=int, default=None,
                   help="echoed into the ensemble for provenance")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("forecast", help="forecast new series with an ensemble")
    p.add_argument("--model", required=True, help="ensemble JSON to read")
    p.add_argument("--series", required=True, help="series CSV to read")
    p.add_argument("--out", required=True, help="forecast CSV to write")
    p.add_argument("--mode", choices=FORECAST_MODES, default="weighted")
    p.add_argument("--levels", type=_levels_type, default=None,
                   help="subset of the trained levels (default: all)")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--provenance",
                   help="write per-series weights and subsets here (JSON)")
    p.add_argument("--benchmarks-dir",
                   help="also fit the full pool; write per-method and "
                        "equal-weight forecast CSVs into this directory")
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("evaluate", help="score forecasts against actuals")
    p.add_argument("--forecasts", required=True, help="forecast CSV to score")
    p.add_argument("--actuals", required=True, help="held-out values CSV")
    p.add_argument("--train", required=True,
                   help="the series CSV the forecasts were made from")
    p.add_argument("--report", required=True, help="report JSON to write")
    p.add_argument("--csv-dir", help="also write flat CSV tables here")
    p.add_argument("--provenance",
                   help="provenance JSON from the forecast run "
                        "(enables selection rates)")
    p.add_argument("--benchmark", action="append", type=_benchmark_type,
                   default=[], metavar="NAME=PATH",
                   help="additional forecast CSV to score (repeatable)")
    p.add_argument("--model-name", default="fuma")
    p.add_argument("--report-level", type=int, default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("effects",
                       help="export partial-effect grids of the error models")
    p.add_argument("--model", required=True, help="ensemble JSON to read")
    p.add_argument("--out", required=True, help="effects CSV to write")
    p.add_argument("--points", type=_positive_int, default=100)
    p.add_argument("--features", help="comma-separated feature filter")
    p.add_argument("--levels", type=_levels_type, default=None)
    p.set_defaults(func=_cmd_effects)

    p = sub.add_parser("threshold-path",
                       help="export the threshold search path")
    p.add_argument("--model", required=True, help="ensemble JSON to read")
    p.add_argument("--out", required=True, help="path CSV to write")
    p.set_defaults(func=_cmd_threshold_path)

    return parser


def _cmd_generate(args) -> int:
    counts = {"yearly": args.yearly, "quarterly": args.quarterly,
              "monthly": args.monthly}
    if sum(counts.values()) == 0:
        raise ValueError("nothing to generate: all counts are zero")
    series = []
    for freq in ("yearly", "quarterly", "monthly"):
        sampler = LengthSampler.default(freq)
        for index in range(args.start, args.start + counts[freq]):
            series.append(generate_one(args.seed, freq, index, sampler))
    if args.actuals_out is None:
        write_series_csv(args.out, series)
    else:
        observed, held_out, offsets = [], [], {}
        for s in series:
            h = s.horizon
            observed.append(s.with_values(s.values[:-h]))
            held_out.append(s.with_values(s.values[-h:]))
            offsets[s.id] = s.n - h
        write_series_csv(args.out, observed)
        write_series_csv(args.actuals_out, held_out, start_index=offsets)
        print(f"wrote {len(series)} series to {args.out}; "
              f"held out the final horizon to {args.actuals_out}")
        return 0
    print(f"wrote {len(series)} series to {args.out}")
    return 0


def _cmd_train(args) -> int:
    series = read_series_csv(args.series)
    config = TrainConfig(levels=args.levels, search_level=args.search_level,
                         seed=args.seed)
    result = train(series, config, jobs=args.jobs)
    save_ensemble(result.ensemble, args.out)
    counts = result.ensemble.config["counts"]
    print(f"trained {len(result.ensemble.models)} error models on "
          + ", ".join(f"{n} {freq}" for freq, n in counts.items())
          + f" series ({len(result.exclusions)} excluded)")
    for mode, res in sorted(result.ensemble.thresholds.items()):
        picks = ", ".join(f"{freq}={tr:g}" for freq, tr in
                          sorted(res.optimal.items()))
        print(f"thresholds [{mode}]: {picks}")
    print(f"saved ensemble to {args.out}")
    return 0


def _cmd_forecast(args) -> int:
    ensemble = load_ensemble(args.model)
    series = read_series_csv(args.series)
    records = run_forecast(ensemble, series, mode=args.mode,
                           levels=args.levels, jobs=args.jobs)
    write_forecast_csv(args.out, {r.series_id: r.intervals for r in records})
    if args.provenance:
        write_provenance_json(args.provenance, args.mode, records)
    if args.benchmarks_dir:
        os.makedirs(args.benchmarks_dir, exist_ok=True)
        levels = args.levels or ensemble.levels
        for name, bench in run_pool(series, levels, jobs=args.jobs).items():
            write_forecast_csv(
                os.path.join(args.benchmarks_dir, f"{name}.csv"),
                {r.series_id: r.intervals for r in bench})
    fell_back = sum(1 for r in records if r.fallbacks)
    print(f"wrote forecasts for {len(records)} series to {args.out}"
          + (f" ({fell_back} with fallbacks)" if fell_back else ""))
    return 0


def _records_from_csv(path, trains, provenance=None) -> list[ForecastRecord]:
    by_id = read_forecast_csv(path)
    missing = sorted(set(by_id) - set(trains))
    if missing:
        raise IdMismatch([f"trains: {sid}" for sid in missing])
    records = []
    for sid, intervals in by_id.items():
        extra = {}
        if provenance is not None and sid in provenance["series"]:
            entry = provenance["series"][sid]
            extra = {"threshold": entry["threshold"],
                     "selected": entry["selected"],
                     "weights": entry["weights"],
                     "fallbacks": entry["fallbacks"]}
        records.append(ForecastRecord(
            series_id=sid, frequency=trains[sid].frequency,
            intervals=intervals, **extra))
    return records


def _cmd_evaluate(args) -> int:
    trains = {s.id: s for s in read_series_csv(args.train)}
    actuals = read_actuals_csv(args.actuals)
    provenance = (read_provenance_json(args.provenance)
                  if args.provenance else None)
    records = _records_from_csv(args.forecasts, trains, provenance)
    benchmarks = {name: _records_from_csv(path, trains)
                  for name, path in args.benchmark}
    report = evaluate(records, actuals, trains, benchmarks=benchmarks,
                      model_name=args.model_name,
                      report_level=args.report_level)
    write_report_json(report, args.report)
    if args.csv_dir:
        write_report_csvs(report, args.csv_dir)
    for row in report.rows:
        if row.frequency == "overall":
            print(f"{row.model} @ {row.level_pct}%: "
                  f"MSIS {row.mean_msis:.3f}, MASE {row.mean_mase:.3f}, "
                  f"ACD {row.acd:.3f} over {row.n_series} series")
    print(f"wrote report to {args.report}")
    return 0


def _cmd_effects(args) -> int:
    ensemble = load_ensemble(args.model)
    wanted = set(args.features.split(",")) if args.features else None
    levels = set(args.levels) if args.levels else set(ensemble.levels)
    rows = []
    for (method, level) in sorted(ensemble.models):
        if level not in levels:
            continue
        model = ensemble.models[(method, level)]
        for term in model.smooths:
            if wanted is not None and term.name not in wanted:
                continue
            grid = np.linspace(term.knots[0], term.knots[-1], args.points)
            effect = partial_effect(model, term.name, grid)
            rows.extend((method, level, term.name, x, e)
                        for x, e in zip(grid, effect))
    if not rows:
        raise ValueError("no matching smooth terms to export")
    write_effects_csv(args.out, rows)
    print(f"wrote {len(rows)} effect rows to {args.out}")
    return 0


def _cmd_threshold_path(args) -> int:
    ensemble = load_ensemble(args.model)
    write_threshold_path_csv(args.out, ensemble.thresholds)
    rows = sum(len(res.path) for res in ensemble.thresholds.values())
    print(f"wrote {rows} path rows to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainingAborted as exc:
        print(f"fuma: training aborted: {exc}", file=sys.stderr)
        return 3
    except (FumaError, OSError, ValueError, KeyError) as exc:
        print(f"fuma: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
