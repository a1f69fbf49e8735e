"""
Ordered parallel map over worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

from diploid_vortex.logging import get_logger

A = TypeVar("A")
R = TypeVar("R")

logger = get_logger(__name__)


def ordered_map(func: Callable[[A], R], items: Iterable[A], workers: int = 1) -> list[R]:
    """
    Apply ``func`` to every item and return results in input order.

    With ``workers > 1`` items are spread over a process pool; results do not
    depend on the worker count as long as ``func`` is a pure function of its item.
    """
    tasks = list(items)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug("Dispatching to process pool", extra={"tasks": len(tasks), "workers": workers})
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks, chunksize=chunk))
