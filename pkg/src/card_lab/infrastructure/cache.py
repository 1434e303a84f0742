from __future__ import annotations

import threading
import time
from collections.abc import Callable
from typing import Generic, TypeVar

T = TypeVar("T")


class TTLCache(Generic[T]):
    """In-process TTL cache for simulation results, shared by the MCP tools."""

    def __init__(self, default_ttl: float = 600) -> None:
        self._default_ttl = default_ttl
        self._lock = threading.Lock()
        self._store: dict[str, tuple[T, float]] = {}
        # Value tuple: (result, expires_at_monotonic)

    def get(self, key: str) -> T | None:
        """Return the cached result or None if missing or expired."""
        with self._lock:
            entry = self._store.get(key)
            if entry is None:
                return None
            value, expires_at = entry
            if time.monotonic() > expires_at:
                del self._store[key]
                return None
            return value

    def set(self, key: str, value: T, ttl: float | None = None) -> None:
        effective_ttl = ttl if ttl is not None else self._default_ttl
        with self._lock:
            self._evict_expired()
            self._store[key] = (value, time.monotonic() + effective_ttl)

    def get_or_compute(self, key: str, compute: Callable[[], T]) -> T:
        """Cached value for key, computing and storing it on a miss.

        ``compute`` runs outside the lock; two concurrent misses both compute
        and the later one wins.
        """
        cached = self.get(key)
        if cached is not None:
            return cached
        value = compute()
        self.set(key, value)
        return value

    def invalidate(self, key: str) -> None:
        with self._lock:
            self._store.pop(key, None)

    def clear(self) -> None:
        with self._lock:
            self._store.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)

    def _evict_expired(self) -> None:
        # Caller holds the lock.
        now = time.monotonic()
        expired = [k for k, (_, exp) in self._store.items() if now > exp]
        for k in expired:
            del self._store[k]
