"""
Shared vocabulary of slices, metrics and simulator events.
"""

from enum import IntEnum


class MetricKind(IntEnum):
    LATENCY = 0
    JITTER = 1
    LOSS = 2

    def __str__(self):
        return self.name

    @property
    def hasWireAux(self):
        # Loss carries the forwarded counter downstream; jitter keeps V_aux local.
        return self == MetricKind.LOSS


class SliceType(IntEnum):
    URLLC = 0
    EMBB = 1
    MMTC = 2

    def __str__(self):
        return self.name

    @classmethod
    def fromString(cls, value: str) -> 'SliceType':
        return cls[value.upper()]


class WorkloadMix(IntEnum):
    SP = 0
    BAL = 1
    LP = 2

    def __str__(self):
        return self.name


class Provenance(IntEnum):
    EXACT = 0
    EARLY_STOPPED = 1
    HEURISTIC = 2
    COLD = 3
    STATIC = 4

    def __str__(self):
        return self.name


class EventKind(IntEnum):
    """Simulator event kinds; the value is the tie-break priority at equal time."""
    EPOCH_BOUNDARY = 0
    EXPORT = 1
    NOTIFICATION = 2
    PACKET_DEPARTURE = 3
    PACKET_ARRIVAL = 4

    def __str__(self):
        return self.name


class Tier(IntEnum):
    ACCESS = 0
    AGGREGATION = 1
    CORE = 2

    def __str__(self):
        return self.name
