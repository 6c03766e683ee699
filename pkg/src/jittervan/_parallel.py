"""Order-preserving parallel map used by the term and trial loops."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "JITTERVAN_THREADS"


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map preserving input order; results are reduced deterministically."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
