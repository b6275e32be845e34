"""Thread fan-out for grid evaluation.

Work is split into contiguous index chunks whose results are concatenated in
index order, so the output never depends on the schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("QDSIM_THREADS", "1") or 1)
    return max(1, int(threads))


def chunked(fn, n: int, threads: int | None = None):
    """Evaluate ``fn(start, stop)`` over ``range(n)`` and concatenate along axis 0."""
    k = min(thread_count(threads), max(n, 1))
    bounds = np.linspace(0, n, k + 1).astype(int)
    spans = list(zip(bounds[:-1], bounds[1:]))
    if k == 1:
        parts = [fn(a, b) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=k) as pool:
            parts = list(pool.map(lambda s: fn(*s), spans))
    return np.concatenate(parts, axis=0)
