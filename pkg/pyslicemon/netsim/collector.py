"""
Collector-side view of reported telemetry and the simulator's ground truth.
"""
from array import array
from typing import Dict, Optional, Tuple

from pyslicemon.core import MetricKind


class Series:
    """Parallel (time ns, value) columns kept in compact typed arrays."""

    __slots__ = ('times', 'values')

    def __init__(self):
        self.times = array('q')
        self.values = array('d')

    def append(self, timeNs: int, value: float):
        self.times.append(int(timeNs))
        self.values.append(float(value))

    def __len__(self):
        return len(self.values)


class CollectorView:
    """
    Reports read at the path egress, per slice and metric. The estimate for a
    delivered packet is the most recent report of its (slice, path).
    """

    def __init__(self, perPacket: bool = True):
        self.perPacket = perPacket
        self.__latest: Dict[Tuple[int, int, MetricKind], float] = {}
        self.reports: Dict[Tuple[int, MetricKind], Series] = {}
        self.estimates: Dict[Tuple[int, MetricKind], Series] = {}
        # Interval-level P90 latency reports, for schemes without per-packet estimates.
        self.p90: Dict[int, Dict[int, float]] = {}

    def report(self, sliceId: int, pathId: int, metric: MetricKind, timeNs: int, value: float):
        self.__latest[(sliceId, pathId, metric)] = value
        self.reports.setdefault((sliceId, metric), Series()).append(timeNs, value)

    def getLatest(self, sliceId: int, pathId: int, metric: MetricKind) -> float:
        return self.__latest.get((sliceId, pathId, metric), 0.0)

    def estimate(self, sliceId: int, pathId: int, metric: MetricKind, timeNs: int,
                 value: Optional[float] = None):
        """Records the estimate the collector holds when a packet is delivered."""
        if value is None:
            value = self.getLatest(sliceId, pathId, metric)
        self.estimates.setdefault((sliceId, metric), Series()).append(timeNs, value)

    def reportP90(self, sliceId: int, interval: int, value: float):
        self.p90.setdefault(sliceId, {})[interval] = value


class GroundTruth:
    def __init__(self):
        self.values: Dict[Tuple[int, MetricKind], Series] = {}
        self.__lastLatency: Dict[Tuple[int, int], float] = {}
        self.generated: Dict[int, int] = {}
        self.delivered: Dict[int, int] = {}
        self.dropped: Dict[int, int] = {}

    def onGenerated(self, sliceId: int):
        self.generated[sliceId] = self.generated.get(sliceId, 0) + 1

    def onDropped(self, sliceId: int):
        self.dropped[sliceId] = self.dropped.get(sliceId, 0) + 1

    def onDelivered(self, pkt, timeNs: int, metrics) -> Dict[MetricKind, float]:
        """Records the true metric values of a delivered packet and returns them."""
        self.delivered[pkt.sliceId] = self.delivered.get(pkt.sliceId, 0) + 1
        latency = float(sum(pkt.hopLatencies))
        key = (pkt.sliceId, pkt.pathId)
        truth = {
            MetricKind.LATENCY: latency,
            MetricKind.JITTER: latency - self.__lastLatency.get(key, 0.0),
            MetricKind.LOSS: float(sum(pkt.hopLoss)),
        }
        self.__lastLatency[key] = latency
        for metric in metrics:
            self.values.setdefault((pkt.sliceId, metric), Series()).append(timeNs, truth[metric])
        return truth

    def getInFlight(self, sliceId: int) -> int:
        return self.generated.get(sliceId, 0) - self.delivered.get(sliceId, 0) - self.dropped.get(sliceId, 0)
