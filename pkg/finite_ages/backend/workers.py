"""Ordered parallel map for search-heavy operations."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """Apply fn to every item, results in input order.

    With ``jobs > 1`` the calls run on a thread pool; the result order never
    depends on scheduling, so callers stay deterministic.
    """
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
