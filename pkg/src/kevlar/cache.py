"""Fixed-capacity write-through cache over a durable key-value backend.

Resident entries are nodes linked into two volatile structures at once:
an eviction queue (doubly linked list, head = next victim) and a
bucketed hash index (FNV-1a over the id, chained) for average O(1)
lookup.  Every save commits to the backend before the volatile tier
changes, so killing the owner process loses nothing.

A query for a non-resident id falls back to the backend and, on
success, promotes the object into the volatile tier (demand fill),
evicting per policy when the cache is full.  Eviction is volatile-only;
evicted ids stay readable through the backend.

The backend is anything with the store read/write surface::

    read_ss(id) -> bytes      # raises NotFoundError when absent
    write_ss(id, value) -> None

A cache is single-owner: transferable between threads, not safe for
simultaneous use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import (
    IdTooLongError,
    InvalidConfigError,
    NotFoundError,
    ValueTooLongError,
)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a of a byte string (the bucket index hash)."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


class Policy(enum.Enum):
    """Eviction policy: least recently used, or insertion order."""

    LRU = "lru"
    FIFO = "fifo"


@dataclass(frozen=True)
class CacheConfig:
    """Bounds of one cache instance.

    capacity counts entries (not bytes); id_size and value_size are
    maxima in bytes, shorter ids and values are stored at their actual
    length.
    """

    capacity: int
    bucket_count: int = 64
    id_size: int = 128
    value_size: int = 65536
    policy: Policy = Policy.LRU

    def __post_init__(self) -> None:
        for name in ("capacity", "bucket_count", "id_size", "value_size"):
            bound = getattr(self, name)
            if not isinstance(bound, int) or isinstance(bound, bool) or bound < 1:
                raise InvalidConfigError(f"{name} must be a positive integer, got {bound!r}")
        if not isinstance(self.policy, Policy):
            raise InvalidConfigError(f"policy must be a Policy, got {self.policy!r}")


@dataclass
class CacheStats:
    """Operation counters; hits + misses + not_found equals query calls."""

    hits: int = 0
    misses: int = 0
    evictions: int = 0
    saves: int = 0
    not_found: int = 0


class _Entry:
    """Node resident in both the eviction queue and the bucket index."""

    __slots__ = ("id", "value", "prev", "next")

    def __init__(self, id: bytes, value: bytes) -> None:
        self.id = id
        self.value = value
        self.prev: _Entry | None = None
        self.next: _Entry | None = None


class Cache:
    """Volatile write-through tier in front of a sealed store."""

    def __init__(self, config: CacheConfig, store) -> None:
        if not isinstance(config, CacheConfig):
            raise InvalidConfigError(f"config must be a CacheConfig, got {config!r}")
        self.config = config
        self.stats = CacheStats()
        self._store = store
        self._buckets: list[list[_Entry]] = [[] for _ in range(config.bucket_count)]
        # Sentinels: head.next is the next eviction victim, tail.prev the
        # most recent entry.
        self._head = _Entry(b"", b"")
        self._tail = _Entry(b"", b"")
        self._head.next = self._tail
        self._tail.prev = self._head
        self._count = 0
        self._freed = False

    # -- queue ----------------------------------------------------------

    def _q_append(self, entry: _Entry) -> None:
        last = self._tail.prev
        assert last is not None
        last.next = entry
        entry.prev = last
        entry.next = self._tail
        self._tail.prev = entry

    def _q_unlink(self, entry: _Entry) -> None:
        assert entry.prev is not None and entry.next is not None
        entry.prev.next = entry.next
        entry.next.prev = entry.prev
        entry.prev = entry.next = None

    def _q_pop_victim(self) -> _Entry:
        victim = self._head.next
        assert victim is not None and victim is not self._tail
        self._q_unlink(victim)
        return victim

    # -- bucket index -----------------------------------------------------

    def _chain(self, id: bytes) -> list[_Entry]:
        return self._buckets[fnv1a_64(id) % self.config.bucket_count]

    def _index_find(self, id: bytes) -> _Entry | None:
        for entry in self._chain(id):
            if entry.id == id:
                return entry
        return None

    # -- validation -------------------------------------------------------

    def _check_live(self) -> None:
        if self._freed:
            raise RuntimeError("cache has been freed")

    def _check_id(self, id: bytes) -> bytes:
        id = bytes(id)
        if not id:
            raise ValueError("id must be non-empty")
        if len(id) > self.config.id_size:
            raise IdTooLongError(f"id is {len(id)} bytes, limit {self.config.id_size}")
        return id

    # -- public surface -----------------------------------------------------

    def __len__(self) -> int:
        return self._count

    def __contains__(self, id: bytes) -> bool:
        """Read-only residency check; never refreshes recency."""
        return not self._freed and self._index_find(bytes(id)) is not None

    def resident_ids(self) -> list[bytes]:
        """Resident ids in eviction order (next victim first)."""
        out = []
        node = self._head.next
        while node is not self._tail:
            assert node is not None
            out.append(node.id)
            node = node.next
        return out

    def query(self, id: bytes) -> bytes:
        """Fetch the value for id from the volatile tier or the backend.

        A hit refreshes recency under LRU and leaves FIFO order alone; a
        backend hit promotes the object into the volatile tier.  Raises
        NotFoundError when the id exists in neither tier; backend
        failures other than absence propagate unchanged.
        """
        self._check_live()
        id = self._check_id(id)
        entry = self._index_find(id)
        if entry is not None:
            self.stats.hits += 1
            if self.config.policy is Policy.LRU:
                self._q_unlink(entry)
                self._q_append(entry)
            return entry.value
        try:
            value = self._store.read_ss(id)
        except NotFoundError:
            self.stats.not_found += 1
            raise
        self.stats.misses += 1
        if len(value) <= self.config.value_size:
            self._insert(id, value)
        return value

    def save_object(self, id: bytes, value: bytes) -> None:
        """Store a key/value pair in both tiers, backend first.

        The backend write completes before the volatile tier is touched;
        if it fails, the volatile tier is left exactly as it was.  An
        existing resident id has its value replaced in place: that
        refreshes recency under LRU and keeps the insertion position
        under FIFO.
        """
        self._check_live()
        id = self._check_id(id)
        value = bytes(value)
        if len(value) > self.config.value_size:
            raise ValueTooLongError(
                f"value is {len(value)} bytes, limit {self.config.value_size}"
            )
        self._store.write_ss(id, value)
        self.stats.saves += 1
        entry = self._index_find(id)
        if entry is not None:
            entry.value = value
            if self.config.policy is Policy.LRU:
                self._q_unlink(entry)
                self._q_append(entry)
        else:
            self._insert(id, value)

    def _insert(self, id: bytes, value: bytes) -> None:
        if self._count >= self.config.capacity:
            victim = self._q_pop_victim()
            self._chain(victim.id).remove(victim)
            self._count -= 1
            self.stats.evictions += 1
        entry = _Entry(id, value)
        self._q_append(entry)
        self._chain(id).append(entry)
        self._count += 1

    def free(self) -> None:
        """Release all volatile state; the backend is left untouched.

        The instance is unusable afterwards; build a new cache over the
        same store to repopulate on demand.
        """
        for chain in self._buckets:
            chain.clear()
        node = self._head.next
        while node is not None and node is not self._tail:
            nxt = node.next
            node.prev = node.next = None
            node = nxt
        self._head.next = self._tail
        self._tail.prev = self._head
        self._count = 0
        self._freed = True


def init_cache(config: CacheConfig, store) -> Cache:
    """Build an empty cache over an open store; the backend is not touched."""
    return Cache(config, store)


def free_cache(cache: Cache) -> None:
    """Release a cache's volatile resources, keeping stored objects intact."""
    cache.free()


def cache_query(cache: Cache, id: bytes) -> bytes:
    """Fetch the value for id through the cache (either tier)."""
    return cache.query(id)


def cache_save_object(cache: Cache, id: bytes, value: bytes) -> None:
    """Save a key/value pair write-through (backend first, then volatile)."""
    cache.save_object(id, value)
