"""Exception hierarchy shared across the package.

Batch-oriented callers catch :class:`FumaError` to keep one bad series from
aborting a whole run; everything raised on purpose derives from it.
"""


class FumaError(Exception):
    """Base class for all errors raised by this package."""


class SeriesTooShort(FumaError):
    """A series does not have enough observations for the requested operation."""


class DegenerateSeries(FumaError):
    """A series has zero variance, so variance-based statistics are undefined."""


class NonFiniteSimulation(FumaError):
    """A simulated series produced non-finite values (invalid generator state)."""


class MethodFailed(FumaError):
    """An individual forecasting method failed on a series.

    Carries the method id and a reason so callers can substitute a fallback
    and keep a record of it.
    """

    def __init__(self, method: str, reason: str):
        super().__init__(f"{method}: {reason}")
        self.method = method
        self.reason = reason


class ZeroDenominator(FumaError):
    """The seasonal-difference scaling denominator of a scaled score is zero."""


class SingularDesign(FumaError):
    """A regression design matrix is rank-deficient beyond repair."""


class RegistryMismatch(FumaError):
    """Feature registry hashes disagree between a model and its input."""


class LevelMismatch(FumaError):
    """Interval forecasts with different confidence levels were combined."""


class UnknownFeature(FumaError):
    """A feature name is not part of the frozen registry or the model."""


class InsufficientData(FumaError):
    """Not enough rows/series for the requested statistical procedure."""


class IdMismatch(FumaError):
    """Series ids do not align between forecasts and actuals."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"unmatched series ids: {self.missing[:10]}"
                         + ("..." if len(self.missing) > 10 else ""))


class DataFormatError(FumaError):
    """An input file does not follow the documented CSV/JSON layout."""


class TrainingAborted(FumaError):
    """Too large a share of one frequency's series failed during training."""
