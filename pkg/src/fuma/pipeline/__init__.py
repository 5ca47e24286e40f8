"""Orchestration: training, forecasting, evaluation, persistence, CLI."""

from fuma.pipeline.ensemble import (FORMAT_VERSION, TrainedEnsemble,
                                    load_ensemble, save_ensemble)
from fuma.pipeline.evaluate import (EvaluationReport, MetricRow, SelectionRow,
                                    evaluate, write_report_csvs,
                                    write_report_json)
from fuma.pipeline.forecast import (AVERAGE_BENCHMARK, FORECAST_MODES,
                                    ForecastRecord, forecast_series,
                                    run_forecast, run_pool)
from fuma.pipeline.mcb import McbResult, mcb_test
from fuma.pipeline.train import TrainConfig, TrainResult, train

__all__ = [
    "AVERAGE_BENCHMARK",
    "FORECAST_MODES",
    "FORMAT_VERSION",
    "EvaluationReport",
    "ForecastRecord",
    "McbResult",
    "MetricRow",
    "SelectionRow",
    "TrainConfig",
    "TrainResult",
    "TrainedEnsemble",
    "evaluate",
    "forecast_series",
    "load_ensemble",
    "mcb_test",
    "run_forecast",
    "run_pool",
    "save_ensemble",
    "train",
    "write_report_csvs",
    "write_report_json",
]
