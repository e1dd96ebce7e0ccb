import itertools

import numpy as np
import pytest
from scipy import stats

from pyslicemon.dataplane.buckets import BucketArrays, BucketEntry


def findColliding(buckets, first):
    """A key sharing first's slot in array 0 but not in array 1."""
    for candidate in itertools.count(1):
        key = (candidate, 0, 0)
        if buckets.hash(0, key) == buckets.hash(0, first) and buckets.hash(1, key) != buckets.hash(1, first):
            return key


def test_insert_then_lookup():
    buckets = BucketArrays(2, 64, seed=3)
    entry, evicted = buckets.insert((1, 2, 3))
    assert evicted is None
    assert entry.fresh
    found, _ = buckets.lookup((1, 2, 3))
    assert found is entry
    assert buckets.getOccupancy() == 1


def test_colliding_keys_both_found():
    buckets = BucketArrays(2, 8, seed=3)
    first = (0, 0, 0)
    second = findColliding(buckets, first)
    a, _ = buckets.insert(first)
    b, evicted = buckets.insert(second)
    assert evicted is None
    assert buckets.lookup(first)[0] is a
    assert buckets.lookup(second)[0] is b


def test_full_candidate_slots_evict_the_first_array():
    buckets = BucketArrays(1, 1, seed=0)
    a, _ = buckets.insert((1, 1, 1))
    b, evicted = buckets.insert((2, 2, 2))
    assert evicted is a
    assert buckets.lookup((1, 1, 1))[0] is None
    assert buckets.lookup((2, 2, 2))[0] is b
    assert buckets.getOccupancy() == 1


def test_remove():
    buckets = BucketArrays(2, 16)
    buckets.insert((5, 5, 5))
    assert buckets.remove((5, 5, 5))
    assert not buckets.remove((5, 5, 5))
    assert buckets.getOccupancy() == 0


def test_insert_existing_key_returns_it():
    buckets = BucketArrays(2, 16)
    entry, _ = buckets.insert((5, 5, 5))
    again, evicted = buckets.insert((5, 5, 5))
    assert again is entry and evicted is None


def test_hash_is_uniform():
    w = 4096
    buckets = BucketArrays(1, w, seed=0x5eed)
    counts = np.zeros(w, dtype=np.int64)
    for sliceId in range(300):
        for pathId in range(137):
            counts[buckets.hash(0, (sliceId, pathId, 1))] += 1
    _, pvalue = stats.chisquare(counts)
    assert pvalue > 1e-3


def test_hash_functions_are_independent_across_arrays():
    buckets = BucketArrays(2, 1024, seed=1)
    same = sum(buckets.hash(0, (k, 0, 0)) == buckets.hash(1, (k, 0, 0)) for k in range(20000))
    assert same < 60


def test_memory_footprint():
    buckets = BucketArrays(2, 4096)
    assert buckets.getMemoryBytes() == 2 * 4096 * BucketEntry.ENTRY_BYTES


def test_invalid_dimensions():
    with pytest.raises(ValueError):
        BucketArrays(0, 16)
