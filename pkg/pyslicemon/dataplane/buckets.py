"""
d hash-indexed bucket arrays holding per-(slice, path, port) telemetry state.
"""
from typing import Dict, List, Optional, Tuple

from pyslicemon.core import MetricKind

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + GOLDEN64) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def packKey(key: Tuple[int, int, int]) -> int:
    sliceId, pathId, port = key
    return ((sliceId & 0xFFFFFF) << 32) | ((pathId & 0xFFFF) << 16) | (port & 0xFFFF)


class MetricState:
    __slots__ = ('ePrev', 'eRep', 'eLast', 'vAux', 'lastHop')

    def __init__(self):
        self.ePrev = 0.0
        self.eRep = 0.0
        self.eLast = 0.0
        # Prior per-hop latency (jitter) or forwarded-packet counter (loss).
        self.vAux = 0.0
        # Last per-hop contribution, held while the upstream skips.
        self.lastHop = 0.0

    def __repr__(self):
        return (f'MetricState(ePrev={self.ePrev}, eRep={self.eRep}, eLast={self.eLast}, '
                f'vAux={self.vAux}, lastHop={self.lastHop})')


class BucketEntry:
    # key (8 B) + per metric E_prev, E_rep, E_last, V_aux (4 x 4 B) + flag byte, padded.
    ENTRY_BYTES = 8 + len(MetricKind) * 16 + 8

    __slots__ = ('key', 'metrics', 'fTm', 'fresh')

    def __init__(self, key: Tuple[int, int, int]):
        self.key = key
        self.metrics: Dict[MetricKind, MetricState] = {}
        self.fTm = False
        # Set on insertion after a miss; cleared by the first packet that reports.
        self.fresh = True

    def getMetric(self, metric: MetricKind) -> MetricState:
        state = self.metrics.get(metric)
        if state is None:
            state = MetricState()
            self.metrics[metric] = state
        return state

    def __repr__(self):
        return f'BucketEntry(key={self.key}, fTm={self.fTm}, metrics={self.metrics})'


class BucketArrays:
    """
    :param d: Number of arrays.
    :type d: int.
    :param w: Buckets per array.
    :type w: int.
    :param seed: Seed for the d hash functions.
    :type seed: int.
    """

    def __init__(self, d: int, w: int, seed: int = 0):
        if d < 1 or w < 1:
            raise ValueError('bucket arrays need d >= 1 and w >= 1')
        self.__d = d
        self.__w = w
        self.__seeds = [mix64((seed + i * GOLDEN64) & MASK64) for i in range(d)]
        self.__slots: List[List[Optional[BucketEntry]]] = [[None] * w for _ in range(d)]
        self.__indexCache: Dict[Tuple[int, int, int], Tuple[int, ...]] = {}
        self.__occupancy = 0

    def getD(self) -> int:
        return self.__d

    def getW(self) -> int:
        return self.__w

    def getOccupancy(self) -> int:
        return self.__occupancy

    def getMemoryBytes(self) -> int:
        return self.__d * self.__w * BucketEntry.ENTRY_BYTES

    def hash(self, i: int, key) -> int:
        return mix64(packKey(key) ^ self.__seeds[i]) % self.__w

    def indices(self, key) -> Tuple[int, ...]:
        cached = self.__indexCache.get(key)
        if cached is None:
            cached = tuple(self.hash(i, key) for i in range(self.__d))
            self.__indexCache[key] = cached
        return cached

    def lookup(self, key) -> Tuple[Optional[BucketEntry], Tuple[int, int]]:
        """Returns (entry, slot) on a hit and (None, insertion slot) on a miss."""
        indices = self.indices(key)
        for i, index in enumerate(indices):
            entry = self.__slots[i][index]
            if entry is not None and entry.key == key:
                return entry, (i, index)
        for i, index in enumerate(indices):
            if self.__slots[i][index] is None:
                return None, (i, index)
        return None, (0, indices[0])

    def insert(self, key) -> Tuple[BucketEntry, Optional[BucketEntry]]:
        """Creates a fresh entry for key; returns it with the evicted entry, if any."""
        found, (i, index) = self.lookup(key)
        if found is not None:
            return found, None
        evicted = self.__slots[i][index]
        entry = BucketEntry(key)
        self.__slots[i][index] = entry
        if evicted is None:
            self.__occupancy += 1
        return entry, evicted

    def remove(self, key) -> bool:
        found, (i, index) = self.lookup(key)
        if found is None:
            return False
        self.__slots[i][index] = None
        self.__occupancy -= 1
        return True

    def entries(self):
        for row in self.__slots:
            for entry in row:
                if entry is not None:
                    yield entry
