"""
Thread-pool map used for Monte Carlo trials and sweep cells
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from utils.logger import ProgressLogger

T = TypeVar('T')
R = TypeVar('R')

THREADS_ENV = 'REGRETLAB_THREADS'

logger = logging.getLogger(__name__)


def resolve_threads(threads: Optional[int] = None) -> int:
    """
    Decide the worker count.

    Args:
        threads: Explicit worker count (takes precedence when positive)

    Returns:
        Number of workers, at least 1
    """
    if threads is not None and int(threads) > 0:
        return int(threads)

    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            parsed = int(value)
            if parsed > 0:
                return parsed
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid {THREADS_ENV}={value!r}")

    return os.cpu_count() or 1


def parallel_map(
    func: Callable[[T], R],
    items: Sequence[T],
    threads: Optional[int] = None,
    progress_label: Optional[str] = None,
) -> List[R]:
    """
    Apply func to every item, returning results in input order.

    Args:
        func: Pure function of one item
        items: Work items
        threads: Worker cap (see resolve_threads)
        progress_label: When set, log progress under this label

    Returns:
        List of results aligned with items
    """
    workers = min(resolve_threads(threads), max(len(items), 1))
    progress = ProgressLogger(len(items), logger) if progress_label else None

    if workers == 1:
        results = []
        for item in items:
            results.append(func(item))
            if progress:
                progress.update(1, progress_label)
        return results

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, item) for item in items]
        results = []
        for future in futures:
            results.append(future.result())
            if progress:
                progress.update(1, progress_label)
    return results
