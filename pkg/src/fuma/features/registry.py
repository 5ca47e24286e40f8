"""Frozen registry of the 43 series features used by the error models.

The registry is the single source of truth for feature order, definitions,
valid ranges, and invariance guarantees. Trained models store the registry
hash; loading a model under a registry with a different hash is refused, so
a feature redefinition can never be silently paired with old spline fits.

Invariance flags state whether a feature is unchanged under ``y -> a*y + b``
with ``a > 0`` (scale) and under ``y -> y + b`` (shift).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from fuma.errors import UnknownFeature

REGISTRY_VERSION = 1

INF = float("inf")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    definition: str
    lo: float
    hi: float
    shift_invariant: bool
    scale_invariant: bool


FEATURES: tuple[FeatureSpec, ...] = (
    FeatureSpec("x-acf1", "lag-1 autocorrelation of the series", -1.0, 1.0, True, True),
    FeatureSpec("x-acf10", "sum of squared autocorrelations, lags 1-10", 0.0, 10.0, True, True),
    FeatureSpec("diff1-acf1", "lag-1 autocorrelation of the first difference", -1.0, 1.0, True, True),
    FeatureSpec("diff1-acf10", "sum of squared autocorrelations of the first difference, lags 1-10", 0.0, 10.0, True, True),
    FeatureSpec("diff2-acf1", "lag-1 autocorrelation of the second difference", -1.0, 1.0, True, True),
    FeatureSpec("diff2-acf10", "sum of squared autocorrelations of the second difference, lags 1-10", 0.0, 10.0, True, True),
    FeatureSpec("seas-acf1", "autocorrelation at the seasonal lag (0 when m=1)", -1.0, 1.0, True, True),
    FeatureSpec("x-pacf5", "sum of squared partial autocorrelations, lags 1-5", 0.0, 5.0, True, True),
    FeatureSpec("diff1-pacf5", "sum of squared partial autocorrelations of the first difference, lags 1-5", 0.0, 5.0, True, True),
    FeatureSpec("diff2-pacf5", "sum of squared partial autocorrelations of the second difference, lags 1-5", 0.0, 5.0, True, True),
    FeatureSpec("seas-pacf", "partial autocorrelation at the seasonal lag (0 when m=1)", -1.0, 1.0, True, True),
    FeatureSpec("trend-strength", "1 - var(remainder)/var(trend+remainder) from the decomposition, floored at 0", 0.0, 1.0, True, True),
    FeatureSpec("seasonal-strength", "1 - var(remainder)/var(seasonal+remainder) from the decomposition, floored at 0 (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("spike", "variance of leave-one-out variances of the decomposition remainder", 0.0, INF, True, True),
    FeatureSpec("linearity", "projection of the trend component on the orthonormal linear polynomial of time", -INF, INF, True, True),
    FeatureSpec("curvature", "projection of the trend component on the orthonormal quadratic polynomial of time", -INF, INF, True, True),
    FeatureSpec("e-acf1", "lag-1 autocorrelation of the decomposition remainder", -1.0, 1.0, True, True),
    FeatureSpec("e-acf10", "sum of squared autocorrelations of the remainder, lags 1-10", 0.0, 10.0, True, True),
    FeatureSpec("peak", "within-cycle position of the seasonal maximum, divided by m (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("trough", "within-cycle position of the seasonal minimum, divided by m (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("entropy", "normalized Shannon entropy of the periodogram", 0.0, 1.0, True, True),
    FeatureSpec("stability", "variance of the means of non-overlapping blocks of size max(10, 2m)", 0.0, INF, True, False),
    FeatureSpec("lumpiness", "variance of the variances of non-overlapping blocks of size max(10, 2m)", 0.0, INF, True, False),
    FeatureSpec("alpha", "level smoothing weight of a fitted additive trend recursion", 0.0, 1.0, True, True),
    FeatureSpec("beta", "trend smoothing weight of a fitted additive trend recursion", 0.0, 1.0, True, True),
    FeatureSpec("hw-alpha", "level smoothing weight of a fitted additive seasonal recursion (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("hw-beta", "trend smoothing weight of a fitted additive seasonal recursion (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("hw-gamma", "seasonal smoothing weight of a fitted additive seasonal recursion (0 when m=1)", 0.0, 1.0, True, True),
    FeatureSpec("unitroot-kpss", "level-stationarity statistic with Bartlett long-run variance, trunc(4(n/100)^0.25) lags", 0.0, INF, True, True),
    FeatureSpec("unitroot-pp", "Z-alpha unit-root statistic of the lag-1 regression with Bartlett correction", -INF, INF, True, True),
    FeatureSpec("arch-acf", "sum of squared autocorrelations of the squared prewhitened series, lags 1-12", 0.0, 12.0, True, True),
    FeatureSpec("arch-r2", "R^2 of the squared prewhitened series on its first 12 lags", 0.0, 1.0, True, True),
    FeatureSpec("arch-lm", "R^2 of the squared demeaned series on its first 12 lags", 0.0, 1.0, True, True),
    FeatureSpec("garch-acf", "sum of squared autocorrelations of squared standardized conditional-variance residuals, lags 1-12", 0.0, 12.0, True, True),
    FeatureSpec("garch-r2", "R^2 of squared standardized conditional-variance residuals on their first 12 lags", 0.0, 1.0, True, True),
    FeatureSpec("non-linearity", "10 times the R^2 of the cubic-terms auxiliary regression of the lag-1 fit", 0.0, INF, True, True),
    FeatureSpec("hurst", "rescaled-range exponent estimated over dyadic block sizes, clipped to [0, 1]", 0.0, 1.0, True, True),
    FeatureSpec("crossing-points", "number of crossings of the series median", 0.0, INF, True, True),
    FeatureSpec("flat-spots", "longest run within one of ten equal-width value bins", 1.0, INF, True, True),
    FeatureSpec("length", "number of observations", 1.0, INF, True, True),
    FeatureSpec("nperiods", "1 when the series is seasonal (m > 1), else 0", 0.0, 1.0, True, True),
    FeatureSpec("seasonal-period-q", "1 when m = 4, else 0", 0.0, 1.0, True, True),
    FeatureSpec("seasonal-period-m", "1 when m = 12, else 0", 0.0, 1.0, True, True),
)

N_FEATURES = len(FEATURES)

FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in FEATURES)

_INDEX = {f.name: i for i, f in enumerate(FEATURES)}


def index_of(name: str) -> int:
    try:
        return _INDEX[name]
    except KeyError:
        raise UnknownFeature(f"unknown feature {name!r}") from None


def _bound(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return format(x, "g")


def registry_table() -> str:
    """Render the registry as a stable text table (hashed for versioning)."""
    lines = [f"feature registry version {REGISTRY_VERSION}",
             f"features {N_FEATURES}",
             "name | definition | range | shift-invariant | scale-invariant"]
    for f in FEATURES:
        lines.append(
            f"{f.name} | {f.definition} | [{_bound(f.lo)}, {_bound(f.hi)}] | "
            f"{'yes' if f.shift_invariant else 'no'} | "
            f"{'yes' if f.scale_invariant else 'no'}")
    return "\n".join(lines) + "\n"


def registry_hash() -> str:
    return hashlib.sha256(registry_table().encode("utf-8")).hexdigest()


def validate_vector(values: np.ndarray) -> None:
    """Check a feature vector is finite and inside every declared range."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (N_FEATURES,):
        raise ValueError(f"expected shape ({N_FEATURES},), got {values.shape}")
    if not np.all(np.isfinite(values)):
        bad = [FEATURES[i].name for i in np.nonzero(~np.isfinite(values))[0]]
        raise ValueError(f"non-finite feature values: {bad}")
    eps = 1e-9
    for i, f in enumerate(FEATURES):
        if values[i] < f.lo - eps or values[i] > f.hi + eps:
            raise ValueError(
                f"feature {f.name!r} value {values[i]!r} outside "
                f"[{f.lo}, {f.hi}]")
