"""Feature-based interval forecast combination for batches of time series."""

from fuma.core import (
    HORIZON_BY_FREQUENCY,
    PERIOD_BY_FREQUENCY,
    VALID_PERIODS,
    ForecastBundle,
    IntervalForecast,
    SplitSeries,
    TimeSeries,
    split,
)
from fuma.combiner import (
    CombinationWeights,
    ReferenceCase,
    ThresholdResult,
    adjusted_softmax,
    combine_intervals,
    combine_point,
    search_threshold,
    select_by_threshold,
)
from fuma.errors import (
    DataFormatError,
    DegenerateSeries,
    FumaError,
    IdMismatch,
    InsufficientData,
    LevelMismatch,
    MethodFailed,
    NonFiniteSimulation,
    RegistryMismatch,
    SeriesTooShort,
    SingularDesign,
    TrainingAborted,
    UnknownFeature,
    ZeroDenominator,
)
from fuma.gam import (
    GamModel,
    FitDiagnostics,
    SmoothTerm,
    fit_gam,
    partial_effect,
    predict_gam,
    predict_matrix,
)
from fuma.generator import generate_one, generate_reference_set
from fuma.methods import forecast, forecast_with_fallback
from fuma.methods.base import METHOD_IDS
from fuma.metrics import acd, covered_count, mase, msis, seasonal_scale

__version__ = "0.1.0"

__all__ = [
    "HORIZON_BY_FREQUENCY",
    "PERIOD_BY_FREQUENCY",
    "VALID_PERIODS",
    "ForecastBundle",
    "IntervalForecast",
    "SplitSeries",
    "TimeSeries",
    "split",
    "FumaError",
    "DataFormatError",
    "DegenerateSeries",
    "IdMismatch",
    "InsufficientData",
    "LevelMismatch",
    "MethodFailed",
    "NonFiniteSimulation",
    "RegistryMismatch",
    "SeriesTooShort",
    "SingularDesign",
    "TrainingAborted",
    "UnknownFeature",
    "ZeroDenominator",
    "METHOD_IDS",
    "CombinationWeights",
    "ReferenceCase",
    "ThresholdResult",
    "adjusted_softmax",
    "combine_intervals",
    "combine_point",
    "search_threshold",
    "select_by_threshold",
    "GamModel",
    "FitDiagnostics",
    "SmoothTerm",
    "fit_gam",
    "partial_effect",
    "predict_gam",
    "predict_matrix",
    "generate_one",
    "generate_reference_set",
    "forecast",
    "forecast_with_fallback",
    "acd",
    "covered_count",
    "mase",
    "msis",
    "seasonal_scale",
    "__version__",
]
