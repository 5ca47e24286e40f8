"""Order-preserving parallel map over independent per-series work items."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence


def map_ordered(fn: Callable, items: Sequence, jobs: int) -> list:
    """Apply ``fn`` to every item, preserving input order in the result.

    With ``jobs`` of 1 the work runs in-process (the canonical reference
    path); higher values fan out to worker processes.  Results are
    assembled in submission order, so the output is identical either way.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    items = list(items)
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
