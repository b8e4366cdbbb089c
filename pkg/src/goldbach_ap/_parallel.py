"""Ordered thread-pool map; results never depend on the thread count."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def blocks(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    """Split ``[lo, hi]`` into fixed-size inclusive blocks."""
    return [(a, min(a + size - 1, hi)) for a in range(lo, hi + 1, size)]
