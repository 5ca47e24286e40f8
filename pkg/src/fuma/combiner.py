"""Error-based combination of interval forecasts.

Fitted per-method error scores (log interval scores, lower is better) are
mapped to positive combination weights with a spread-adjusted softmax.  A
threshold on the weight ratio to the best method selects the subset that
participates in the combination, and a grid search over that threshold picks
the value that minimizes the mean scaled interval score on reference data.

Combined intervals are convex combinations of the member bounds; the
combined point forecast is the midpoint of the combined interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import FREQUENCY_BY_PERIOD, IntervalForecast
from .errors import LevelMismatch, ZeroDenominator
from .metrics import msis

__all__ = [
    "COMBINATION_MODES",
    "DEFAULT_TR_GRID",
    "CombinationWeights",
    "ReferenceCase",
    "ThresholdResult",
    "adjusted_softmax",
    "combine_intervals",
    "combine_point",
    "search_threshold",
    "select_by_threshold",
]

COMBINATION_MODES = ("mean", "weighted")

# Candidate threshold ratios: 0, 0.05, ..., 1.0.
DEFAULT_TR_GRID = tuple(i / 20 for i in range(21))


@dataclass(frozen=True)
class CombinationWeights:
    """Positive per-method weights that sum to one.

    Attributes
    ----------
    weights : mapping of str to float
        Weight for each method id.
    mu : float
        Mean of the fitted scores the weights were derived from.
    sigma : float
        Sample standard deviation of the fitted scores.
    """

    weights: Mapping[str, float]
    mu: float = float("nan")
    sigma: float = float("nan")

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("weights must not be empty")
        values = np.asarray(list(self.weights.values()), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("weights must be finite")
        if np.any(values <= 0.0):
            raise ValueError("weights must be strictly positive")
        total = float(values.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {total!r}")

    def ratio_to_best(self) -> dict[str, float]:
        """Return each weight divided by the largest weight."""
        best = max(self.weights.values())
        return {k: v / best for k, v in self.weights.items()}


@dataclass(frozen=True)
class ReferenceCase:
    """One reference series used by the threshold search.

    Attributes
    ----------
    series_id : str
        Identifier, used in error messages only.
    train : numpy.ndarray
        Training values, the scale basis for the interval score.
    period : int
        Seasonal period of the series (1, 4, or 12).
    test : numpy.ndarray
        Held-out values the combined interval is scored against.
    forecasts : mapping of str to IntervalForecast
        Per-method interval forecasts at one confidence level.
    fitted : mapping of str to float
        Fitted error score per method (lower is better).
    """

    series_id: str
    train: np.ndarray
    period: int
    test: np.ndarray
    forecasts: Mapping[str, IntervalForecast]
    fitted: Mapping[str, float]

    @property
    def frequency(self) -> str:
        return FREQUENCY_BY_PERIOD[self.period]


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold grid search.

    Attributes
    ----------
    mode : str
        Combination mode the search was run with.
    level_pct : int
        Confidence level of the searched intervals, in percent.
    optimal : mapping of str to float
        Selected threshold per frequency.
    path : tuple of (str, float, float)
        One row per (frequency, threshold): the mean interval score that
        threshold achieved over the usable reference series.
    excluded : mapping of str to int
        Number of reference series per frequency dropped because the
        interval score was undefined for them.
    """

    mode: str
    level_pct: int
    optimal: Mapping[str, float]
    path: tuple[tuple[str, float, float], ...]
    excluded: Mapping[str, int]

    def __post_init__(self) -> None:
        for freq, tr in self.optimal.items():
            if not 0.0 <= tr <= 1.0:
                raise ValueError(f"threshold for {freq} outside [0, 1]: {tr!r}")
        for freq, tr, score in self.path:
            if not math.isfinite(score):
                raise ValueError(f"non-finite mean score in path at ({freq}, {tr})")

    def path_rows(self) -> list[tuple[str, float, float]]:
        """Return the search path as a list of (frequency, tr, mean_score) rows."""
        return list(self.path)


def adjusted_softmax(fitted: Mapping[str, float]) -> CombinationWeights:
    """Convert fitted error scores to combination weights.

    Scores are standardized by their mean and sample standard deviation,
    then passed through a softmax on the negated z-scores so that lower
    error yields higher weight.  When all scores are equal the weights
    are uniform.

    Parameters
    ----------
    fitted : mapping of str to float
        Fitted error score per method (lower is better).  At least two
        methods, all values finite.

    Returns
    -------
    CombinationWeights
        Strictly positive weights summing to one.
    """
    if len(fitted) < 2:
        raise ValueError("need at least two methods to build weights")
    names = list(fitted.keys())
    scores = np.asarray([fitted[k] for k in names], dtype=float)
    if not np.all(np.isfinite(scores)):
        raise ValueError("fitted scores must be finite")
    mu = float(scores.mean())
    sigma = float(scores.std(ddof=1))
    if sigma == 0.0:
        raw = np.ones_like(scores)
    else:
        raw = np.exp((mu - scores) / sigma)
    probs = raw / raw.sum()
    return CombinationWeights(
        weights=dict(zip(names, probs.tolist())), mu=mu, sigma=sigma
    )


def select_by_threshold(weights: CombinationWeights, tr: float) -> tuple[str, ...]:
    """Select the methods whose weight ratio to the best reaches ``tr``.

    A method is kept when its weight divided by the largest weight is at
    least ``tr`` (inclusive).  The best method always survives, so the
    result is never empty: ``tr`` of 0 keeps every method, ``tr`` of 1
    keeps only the maximizers.

    Parameters
    ----------
    weights : CombinationWeights
        Per-method weights.
    tr : float
        Threshold ratio in [0, 1].

    Returns
    -------
    tuple of str
        Selected method ids, in the iteration order of ``weights``.
    """
    if not 0.0 <= tr <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {tr!r}")
    ratios = weights.ratio_to_best()
    return tuple(k for k, r in ratios.items() if r >= tr)


def combine_intervals(
    forecasts: Mapping[str, IntervalForecast],
    weights: CombinationWeights,
    subset: Sequence[str],
    mode: str = "weighted",
) -> IntervalForecast:
    """Combine member intervals over a method subset.

    The combined lower and upper bounds are convex combinations of the
    member bounds.  In ``weighted`` mode the weights are the member
    weights renormalized over the subset; in ``mean`` mode every subset
    member gets the same weight.  The combined point forecast is the
    midpoint of the combined interval.

    Parameters
    ----------
    forecasts : mapping of str to IntervalForecast
        Per-method forecasts, all at the same confidence level and horizon.
    weights : CombinationWeights
        Per-method weights (used in ``weighted`` mode).
    subset : sequence of str
        Method ids to combine; must be non-empty and present in both
        ``forecasts`` and ``weights``.
    mode : str
        ``"weighted"`` or ``"mean"``.

    Returns
    -------
    IntervalForecast
        The combined interval with midpoint point forecasts.
    """
    if mode not in COMBINATION_MODES:
        raise ValueError(f"mode must be one of {COMBINATION_MODES}, got {mode!r}")
    members = list(subset)
    if not members:
        raise ValueError("subset must not be empty")
    missing = [k for k in members if k not in forecasts]
    if missing:
        raise ValueError(f"no forecast for subset members: {missing}")
    if mode == "weighted":
        absent = [k for k in members if k not in weights.weights]
        if absent:
            raise ValueError(f"no weight for subset members: {absent}")
        raw = np.asarray([weights.weights[k] for k in members], dtype=float)
    else:
        raw = np.ones(len(members))
    share = raw / raw.sum()

    first = forecasts[members[0]]
    alpha = first.alpha
    horizon = first.lower.shape[0]
    lower = np.zeros(horizon)
    upper = np.zeros(horizon)
    for w, name in zip(share, members):
        fc = forecasts[name]
        if fc.alpha != alpha:
            raise LevelMismatch(
                f"member {name!r} is at level {fc.level_pct}, expected {first.level_pct}"
            )
        if fc.lower.shape[0] != horizon:
            raise ValueError(
                f"member {name!r} has horizon {fc.lower.shape[0]}, expected {horizon}"
            )
        lower = lower + w * fc.lower
        upper = upper + w * fc.upper
    return IntervalForecast(
        alpha=alpha, lower=lower, upper=upper, point=(lower + upper) / 2.0
    )


def combine_point(interval: IntervalForecast) -> np.ndarray:
    """Return the midpoint point forecast of an interval forecast."""
    return (interval.lower + interval.upper) / 2.0


def search_threshold(
    cases: Sequence[ReferenceCase],
    grid: Sequence[float] = DEFAULT_TR_GRID,
    mode: str = "weighted",
    level_pct: int = 95,
) -> ThresholdResult:
    """Pick, per frequency, the threshold minimizing the mean interval score.

    For every reference series the fitted scores are converted to weights
    once; each candidate threshold then selects a subset, the member
    intervals are combined, and the combination is scored against the
    held-out values.  Per frequency the threshold with the smallest mean
    score wins, ties going to the smallest threshold.  Series whose score
    is undefined (degenerate scale) are excluded and counted.

    Parameters
    ----------
    cases : sequence of ReferenceCase
        Reference series with per-method forecasts and fitted scores.
    grid : sequence of float
        Candidate thresholds, each in [0, 1].  Must be non-empty.
    mode : str
        ``"weighted"`` or ``"mean"``.
    level_pct : int
        Confidence level of the searched intervals, recorded in the result.

    Returns
    -------
    ThresholdResult
        Optimal threshold per frequency plus the full search path.
    """
    if mode not in COMBINATION_MODES:
        raise ValueError(f"mode must be one of {COMBINATION_MODES}, got {mode!r}")
    grid = sorted(grid)
    if not grid:
        raise ValueError("threshold grid must not be empty")
    for tr in grid:
        if not 0.0 <= tr <= 1.0:
            raise ValueError(f"grid values must be in [0, 1], got {tr!r}")
    if not cases:
        raise ValueError("need at least one reference case")

    by_freq: dict[str, list[ReferenceCase]] = {}
    for case in cases:
        by_freq.setdefault(case.frequency, []).append(case)

    optimal: dict[str, float] = {}
    excluded: dict[str, int] = {}
    path: list[tuple[str, float, float]] = []
    for freq in sorted(by_freq):
        group = by_freq[freq]
        scores = np.full((len(group), len(grid)), np.nan)
        dropped = 0
        for i, case in enumerate(group):
            weights = adjusted_softmax(dict(case.fitted))
            try:
                row = np.empty(len(grid))
                for j, tr in enumerate(grid):
                    subset = select_by_threshold(weights, tr)
                    combined = combine_intervals(case.forecasts, weights, subset, mode)
                    row[j] = msis(
                        case.test,
                        combined.lower,
                        combined.upper,
                        case.train,
                        case.period,
                        combined.alpha,
                    )
            except ZeroDenominator:
                dropped += 1
                continue
            scores[i] = row
        excluded[freq] = dropped
        usable = scores[np.all(np.isfinite(scores), axis=1)]
        if usable.shape[0] == 0:
            raise ValueError(f"no usable reference series for frequency {freq!r}")
        means = usable.mean(axis=0)
        best = int(np.argmin(means))
        optimal[freq] = grid[best]
        path.extend((freq, tr, float(mean)) for tr, mean in zip(grid, means))

    return ThresholdResult(
        mode=mode,
        level_pct=level_pct,
        optimal=optimal,
        path=tuple(path),
        excluded=excluded,
    )
