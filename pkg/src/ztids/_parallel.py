"""Thread-pool map that keeps results in submission order.

Work items within one batch must not depend on each other; results are
aggregated in index order so thread scheduling cannot change any outcome.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence


def ordered_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Apply fn to each item; return results in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, it) for it in items]
        return [f.result() for f in futures]
