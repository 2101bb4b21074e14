"""Index-keyed parallel map over independent Monte-Carlo trials."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

__all__ = ["THREADS_ENV", "worker_count", "index_map"]

T = TypeVar("T")
THREADS_ENV = "LEVY_LAB_THREADS"


def worker_count() -> int:
    """Worker cap from ``LEVY_LAB_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def index_map(fn: Callable[[int], T], count: int, workers: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(count - 1)]``, computed on up to `workers` threads.

    Each trial derives its randomness from its own index, so the merged list
    is identical for every schedule.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(workers, count)) as pool:
        return list(pool.map(fn, range(count)))
