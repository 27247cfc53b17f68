"""Tiny thread-pool helper; the worker count comes from ``NCLP_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("NCLP_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map, threaded when ``NCLP_THREADS > 1``."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
