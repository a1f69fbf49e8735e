"""
Memoisation of solved tables and stationary laws.
"""

import threading
from typing import Any, Callable, Hashable, Optional, TypeVar

from cachetools import LRUCache

from diploid_vortex.config.settings import get_settings
from diploid_vortex.logging import get_logger

T = TypeVar("T")

logger = get_logger(__name__)


class ResultCache:
    """LRU cache keyed by solver inputs; values are immutable result objects."""

    def __init__(self, name: str, max_size: int):
        self.name = name
        self.cache: LRUCache = LRUCache(maxsize=max_size)
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            value = self.cache.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def set(self, key: Hashable, value: Any) -> None:
        with self._lock:
            self.cache[key] = value
        logger.debug(f"Cached {self.name} entry", extra={"key": repr(key)})

    def get_or_compute(self, key: Hashable, compute: Callable[[], T]) -> T:
        if not get_settings().cache.enabled:
            return compute()
        cached = self.get(key)
        if cached is not None:
            return cached  # type: ignore[no-any-return]
        value = compute()
        self.set(key, value)
        return value

    def clear(self) -> None:
        with self._lock:
            self.cache.clear()
            self.hits = self.misses = 0


_tables = ResultCache("table", get_settings().cache.max_tables)
_laws = ResultCache("law", get_settings().cache.max_laws)


def table_cache() -> ResultCache:
    return _tables


def law_cache() -> ResultCache:
    return _laws


def clear_caches() -> None:
    _tables.clear()
    _laws.clear()
