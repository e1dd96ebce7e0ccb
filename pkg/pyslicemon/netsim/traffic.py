"""
Per-slice packet arrival streams.
"""
from typing import Iterator, Optional, Tuple

import numpy as np

from pyslicemon.core.slices import SliceSpec, TrafficProfile

BLOCK = 4096


def packetRate(profile: TrafficProfile, scale: float = 1.0) -> float:
    """Mean packets per second of a slice after dividing its rate by scale."""
    if profile.getRateBps() <= 0:
        return 0.0
    return profile.getRateBps() / scale / (8.0 * profile.getMeanPacketBytes())


def genTraffic(slice: SliceSpec, seed: int, scale: float = 1.0, startNs: int = 0,
               untilNs: Optional[int] = None, burstOnMs: Optional[float] = None,
               burstOffMs: Optional[float] = None) -> Iterator[Tuple[int, int]]:
    """Yields (arrival time ns, packet bytes) for one slice.

    The users' independent Poisson flows are generated as their superposition, a
    Poisson stream at the aggregate rate. With ON/OFF bursts the same mean rate
    is compressed into the ON periods.
    """
    profile = slice.traffic
    rate = packetRate(profile, scale)
    if rate <= 0:
        return
    onMs = burstOnMs if burstOnMs is not None else profile.burstOnMs
    offMs = burstOffMs if burstOffMs is not None else profile.burstOffMs
    bursty = bool(onMs) and bool(offMs)
    onNs = offNs = 0.0
    if bursty:
        onNs, offNs = onMs * 1e6 * scale, offMs * 1e6 * scale
        rate *= (onNs + offNs) / onNs

    rng = np.random.default_rng(seed)
    lo, hi = profile.packetBytes
    meanGapNs = 1e9 / rate
    active = 0.0
    while True:
        gaps = rng.exponential(meanGapNs, BLOCK)
        sizes = rng.integers(lo, hi + 1, BLOCK)
        for gap, size in zip(gaps, sizes):
            active += gap
            if bursty:
                cycles, within = divmod(active, onNs)
                at = startNs + int(cycles * (onNs + offNs) + within)
            else:
                at = startNs + int(active)
            if untilNs is not None and at >= untilNs:
                return
            yield at, int(size)
