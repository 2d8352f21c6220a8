"""Order-preserving process pool map.

Results come back in input order whatever the worker count, so callers that
merge partial sums in that order stay bit-identical across ``workers`` values.
"""

from __future__ import annotations

import logging
import multiprocessing
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int]) -> int:
    if workers is None or workers <= 0:
        return max(1, multiprocessing.cpu_count() - 1)
    return workers


def chunk_ranges(total: int, chunk_size: int) -> List[tuple[int, int]]:
    """Split ``range(total)`` into fixed ``[start, stop)`` chunks."""
    if chunk_size <= 0:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def parallel_map(
    func: Callable[[T], R],
    items: Sequence[T] | Iterable[T],
    workers: int = 1,
    *,
    progress: bool = False,
    desc: str = "",
) -> List[R]:
    """Apply a module-level ``func`` to ``items``, preserving order."""
    items = list(items)
    workers = resolve_workers(workers)
    bar = tqdm(total=len(items), desc=desc, unit="chunk", leave=False, disable=not progress)

    results: List[R] = []
    try:
        if workers == 1 or len(items) <= 1:
            for item in items:
                results.append(func(item))
                bar.update(1)
        else:
            logger.info("[parallel] %d tasks on %d workers", len(items), workers)
            with multiprocessing.Pool(workers) as pool:
                for result in pool.imap(func, items):
                    results.append(result)
                    bar.update(1)
    finally:
        bar.close()
    return results


__all__ = ["parallel_map", "chunk_ranges", "resolve_workers"]
