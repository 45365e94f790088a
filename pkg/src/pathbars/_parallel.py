"""Deterministic worker-pool helper.

Trials are split into fixed-size chunks (a function of the trial count
only), each chunk is evaluated independently, and partial results are
combined in chunk-index order, so outputs are bitwise identical for any
worker count.  Workers are forked, so the already-JIT-compiled kernels are
inherited; kernels are warmed up in the parent first.
"""

from __future__ import annotations

import multiprocessing
import os

from . import _kernels

CHUNK_TRIALS = 256
WORKERS_ENV = "PATHBARS_WORKERS"


def resolve_workers(workers=None) -> int:
    """Explicit argument unless the environment override is set; default 1."""
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if workers is None:
        return 1
    return max(int(workers), 1)


def chunk_ranges(trials: int):
    """Fixed chunking of range(trials), independent of worker count."""
    return [
        (start, min(start + CHUNK_TRIALS, trials))
        for start in range(0, trials, CHUNK_TRIALS)
    ]


def pool_map(func, tasks, workers: int):
    """map(func, tasks) preserving order, forked across workers if > 1."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    _kernels.warmup()
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(func, tasks, chunksize=1)
