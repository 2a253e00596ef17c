from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

from src.utils.config_loader import numeric_settings

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: int | None = None) -> int:
    """Thread cap: the explicit request, else `runtime.threads` (SPHERE_KERNELS_THREADS)."""
    n = numeric_settings().threads if requested is None else int(requested)
    return max(1, n)


def ordered_map(func: Callable[[T], R], items: Sequence[T], *, max_workers: int | None = None) -> list[R]:
    """
    Apply `func` to every item and return results in input order.

    With one worker the calls run inline. Otherwise a thread pool is used; `func` must not touch
    shared mutable state, so the result never depends on scheduling.
    """
    workers = min(worker_count(max_workers), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def chunked(items: Sequence[T], parts: int) -> list[Sequence[T]]:
    """Split into at most `parts` contiguous, non-empty slices."""
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    out: list[Sequence[T]] = []
    start = 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out
