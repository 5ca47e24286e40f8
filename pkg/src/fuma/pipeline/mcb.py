"""Multiple-comparisons-with-the-best over per-series score columns.

Scores are ranked per series across models (average ranks on ties) and each
model gets the interval mean-rank +- 0.5 * q * sqrt(K(K+1)/(6N)), where q is
the 95% studentized-range critical constant for K models at infinite degrees
of freedom.  Models whose interval overlaps the best model's interval are
not significantly different from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from ..errors import InsufficientData

# 95% studentized-range quantiles, infinite degrees of freedom, K = 2..12.
Q95_BY_MODELS = {
    2: 2.772, 3: 3.314, 4: 3.633, 5: 3.858, 6: 4.030, 7: 4.170,
    8: 4.286, 9: 4.387, 10: 4.474, 11: 4.552, 12: 4.622,
}

MIN_SERIES = 10


@dataclass(frozen=True)
class McbResult:
    """Mean ranks with a common confidence half-width.

    Attributes
    ----------
    models : tuple of str
        Model names in the input order.
    mean_ranks : mapping of str to float
        Average rank of each model over the retained series (1 is best).
    half_width : float
        Half-width of every model's rank interval.
    n_series : int
        Number of complete score rows the ranks were computed from.
    best : str
        Model with the smallest mean rank (ties broken by name).
    not_different : tuple of str
        Models other than the best whose interval overlaps the best's.
    """

    models: tuple
    mean_ranks: Mapping[str, float]
    half_width: float
    n_series: int
    best: str
    not_different: tuple


def mcb_test(scores: Mapping[str, Sequence[float]]) -> McbResult:
    """Rank models per series and flag those indistinguishable from the best.

    Parameters
    ----------
    scores : mapping of str to sequence of float
        Per-series scores (lower is better), one aligned column per model.
        Rows with any non-finite entry are dropped listwise.

    Returns
    -------
    McbResult
    """
    models = tuple(scores)
    k = len(models)
    if k < 2:
        raise InsufficientData("need at least two models to compare")
    if k > max(Q95_BY_MODELS):
        raise ValueError(
            f"critical constants available for at most {max(Q95_BY_MODELS)} "
            f"models, got {k}")
    columns = [np.asarray(scores[m], dtype=np.float64) for m in models]
    n_rows = {len(c) for c in columns}
    if len(n_rows) != 1:
        raise ValueError("all models must score the same series")
    matrix = np.column_stack(columns)
    matrix = matrix[np.all(np.isfinite(matrix), axis=1)]
    n = matrix.shape[0]
    if n < MIN_SERIES:
        raise InsufficientData(
            f"need at least {MIN_SERIES} complete series, have {n}")

    ranks = np.apply_along_axis(rankdata, 1, matrix)
    means = ranks.mean(axis=0)
    mean_ranks = dict(zip(models, means.tolist()))
    half_width = 0.5 * Q95_BY_MODELS[k] * math.sqrt(k * (k + 1) / (6.0 * n))
    best = min(models, key=lambda m: (mean_ranks[m], m))
    cutoff = mean_ranks[best] + 2.0 * half_width
    not_different = tuple(
        m for m in models if m != best and mean_ranks[m] <= cutoff)
    return McbResult(
        models=models, mean_ranks=mean_ranks, half_width=half_width,
        n_series=n, best=best, not_different=not_different)
