"""
Software model of a switch egress pipeline performing change-triggered
selective telemetry insertion.
"""
import logging
from collections import deque
from typing import Deque, Dict, List, Optional, Tuple

from pyslicemon.core import MetricKind
from pyslicemon.core.constants import HOP_METADATA_BITS, NS_PER_MS, SHIM_BITS
from pyslicemon.core.errors import HeaderOverflowError
from pyslicemon.core.slices import PathSpec
from pyslicemon.dataplane.buckets import BucketArrays, BucketEntry
from pyslicemon.dataplane.header import HopMetadata, Report, fromWire, toWire
from pyslicemon.dataplane.packet import Packet

logger = logging.getLogger(__name__)

INSERTED = 'inserted'
SKIPPED = 'skipped'
MISS = 'miss'
EVICTED = 'evicted'


class DataplaneEvent:
    __slots__ = ('kind', 'nodeId', 'key', 'metric', 'value')

    def __init__(self, kind: str, nodeId: int, key, metric: Optional[MetricKind] = None,
                 value: Optional[float] = None):
        self.kind = kind
        self.nodeId = nodeId
        self.key = key
        self.metric = metric
        self.value = value

    def __repr__(self):
        return f'DataplaneEvent(kind={self.kind}, nodeId={self.nodeId}, key={self.key}, metric={self.metric}, value={self.value})'


class MissNotification:
    __slots__ = ('sliceId', 'pathId', 'fromSwitch', 'toSwitch')

    def __init__(self, sliceId: int, pathId: int, fromSwitch: int, toSwitch: int):
        self.sliceId = sliceId
        self.pathId = pathId
        self.fromSwitch = fromSwitch
        self.toSwitch = toSwitch

    def __repr__(self):
        return f'MissNotification(sliceId={self.sliceId}, pathId={self.pathId}, {self.fromSwitch}->{self.toSwitch})'


class SwitchStats:
    def __init__(self):
        self.lookups = 0
        self.misses = 0
        self.evictions = 0
        self.insertions = 0
        self.forcedInsertions = 0
        self.forcedBits = 0
        self.notificationsSent = 0
        self.notificationsReceived = 0
        self.notificationsDropped = 0
        self.overflows = 0

    def __repr__(self):
        return (f'SwitchStats(lookups={self.lookups}, misses={self.misses}, evictions={self.evictions}, '
                f'insertions={self.insertions}, forcedInsertions={self.forcedInsertions}, '
                f'notificationsSent={self.notificationsSent}, overflows={self.overflows})')


class SwitchState:
    """
    :param nodeId: 10-bit node identifier written into hop metadata.
    :type nodeId: int.
    :param buckets: Bucket arrays holding per-key state.
    :type buckets: :class:`pyslicemon.dataplane.buckets.BucketArrays`.
    :param paths: Registry of active paths by path id, used to route miss notifications.
    :type paths: dict.
    :param timeScale: Simulated time deltas are divided by this to obtain full-scale values.
    :type timeScale: float.
    """

    def __init__(self, nodeId: int, buckets: BucketArrays, paths: Dict[int, PathSpec],
                 headroomBytes: int = 64, timeScale: float = 1.0, reservoirSize: int = 1024,
                 shimPerHop: bool = True):
        self.__nodeId = nodeId
        self.__buckets = buckets
        self.__paths = paths
        self.__headroomBytes = headroomBytes
        self.__timeScale = float(timeScale)
        self.__reservoirSize = reservoirSize
        self.__shimPerHop = shimPerHop
        self.__thresholds: Dict[Tuple[int, MetricKind], float] = {}
        self.__forwarded: Dict[Tuple[int, int], int] = {}
        self.__reservoirs: Dict[Tuple[int, MetricKind, int], Deque[float]] = {}
        self.__outbox: List[MissNotification] = []
        self.__stats = SwitchStats()

    def getNodeId(self) -> int:
        return self.__nodeId

    def getBuckets(self) -> BucketArrays:
        return self.__buckets

    def getStats(self) -> SwitchStats:
        return self.__stats

    def getThreshold(self, sliceId: int, metric: MetricKind) -> Optional[float]:
        return self.__thresholds.get((sliceId, metric))

    def getThresholds(self) -> Dict[Tuple[int, MetricKind], float]:
        return self.__thresholds

    def deployThresholds(self, thresholds: Dict[Tuple[int, MetricKind], float]):
        # Replaced wholesale so no packet ever sees a partially applied table.
        self.__thresholds = dict(thresholds)

    def getForwarded(self, sliceId: int, pathId: int) -> int:
        return self.__forwarded.get((sliceId, pathId), 0)

    def lookup(self, key) -> Optional[BucketEntry]:
        entry, _ = self.__buckets.lookup(key)
        return entry

    def __monitoredMetrics(self, sliceId: int, metricCfg):
        if metricCfg is not None:
            return sorted(metricCfg.items())
        return sorted((m, delta) for (s, m), delta in self.__thresholds.items() if s == sliceId)

    def __record(self, sliceId: int, metric: MetricKind, hopIndex: int, sample: float):
        reservoir = self.__reservoirs.get((sliceId, metric, hopIndex))
        if reservoir is None:
            reservoir = deque(maxlen=self.__reservoirSize)
            self.__reservoirs[(sliceId, metric, hopIndex)] = reservoir
        reservoir.append(sample)

    def pollReservoirs(self) -> Dict[Tuple[int, MetricKind, int], List[float]]:
        """Exports and clears the difference reservoirs, keyed by (slice, metric, hop index)."""
        out = {key: list(samples) for key, samples in self.__reservoirs.items() if samples}
        self.__reservoirs = {}
        return out

    def drainNotifications(self) -> List[MissNotification]:
        out, self.__outbox = self.__outbox, []
        return out

    def __hopValue(self, metric: MetricKind, state, pkt: Packet, latencyMs: float, upstreamAux: Optional[int],
                   forwarded: int) -> Tuple[float, float]:
        """Returns (L_curr, new V_aux) for one metric at this hop."""
        if metric == MetricKind.LATENCY:
            return latencyMs, state.vAux
        if metric == MetricKind.JITTER:
            return latencyMs - state.vAux, latencyMs
        if pkt.hopIndex == 0:
            upstream = pkt.seq
        elif upstreamAux is not None:
            upstream = upstreamAux
        else:
            return state.lastHop, float(forwarded)
        hop = (upstream - forwarded) / upstream if upstream > 0 else 0.0
        return hop, float(forwarded)

    def __seedUpstream(self, metric: MetricKind, hopIndex: int, hop: float, vAux: float,
                       latencyMs: float) -> Tuple[float, float, float]:
        """(E_prev, L_curr, V_aux) for a fresh entry whose upstream hop did not report.

        Latency takes every upstream hop to match this one; jitter and loss
        start from zero until the forced upstream report arrives.
        """
        if metric == MetricKind.LATENCY:
            return hopIndex * hop, hop, vAux
        if metric == MetricKind.JITTER:
            return 0.0, 0.0, latencyMs
        return 0.0, hop, vAux

    def processPacket(self, pkt: Packet, metricCfg: Optional[Dict[MetricKind, float]] = None):
        """Runs the egress pipeline on pkt.

        :param pkt: Packet with ingressNs, egressNs and hopIndex set for this switch.
        :param metricCfg: Thresholds per metric overriding the deployed table.
        :return: (pkt, events)
        """
        key = (pkt.sliceId, pkt.pathId, self.__portFor(pkt))
        events: List[DataplaneEvent] = []
        self.__stats.lookups += 1
        entry, _ = self.__buckets.lookup(key)
        if entry is None:
            self.__stats.misses += 1
            entry, evicted = self.__buckets.insert(key)
            events.append(DataplaneEvent(MISS, self.__nodeId, key))
            if pkt.hopIndex > 0:
                self.handleMiss(key)
            if evicted is not None:
                self.__stats.evictions += 1
                events.append(DataplaneEvent(EVICTED, self.__nodeId, evicted.key))
                self.handleMiss(evicted.key)

        header = pkt.header
        latencyMs = (pkt.egressNs - pkt.ingressNs) / NS_PER_MS / self.__timeScale
        pathKey = (pkt.sliceId, pkt.pathId)
        forwarded = self.__forwarded.get(pathKey, 0) + 1
        forced = entry.fTm or entry.fresh

        pending = []
        newReports: Dict[MetricKind, Report] = {}
        for metric, delta in self.__monitoredMetrics(pkt.sliceId, metricCfg):
            state = entry.getMetric(metric)
            upstream = header.reports.get(metric) if pkt.hopIndex > 0 else None
            hop, vAux = self.__hopValue(metric, state, pkt, latencyMs,
                                        upstream.aux if upstream is not None else None, forwarded)
            if upstream is not None:
                ePrev = fromWire(metric, upstream.value)
            elif pkt.hopIndex == 0:
                ePrev = 0.0
            elif entry.fresh:
                ePrev, hop, vAux = self.__seedUpstream(metric, pkt.hopIndex, hop, vAux, latencyMs)
            else:
                ePrev = state.ePrev
            eCurr = ePrev + hop
            insert = forced or abs(eCurr - state.eRep) >= delta
            if insert:
                newReports[metric] = Report(toWire(metric, eCurr), forwarded if metric.hasWireAux else None)
            pending.append((metric, state, ePrev, hop, vAux, eCurr, insert))

        hops = header.hops + [HopMetadata(self.__nodeId)]
        size = 3 + -(-HOP_METADATA_BITS * len(hops) // 8) + sum(
            4 + (4 if r.aux is not None else 0) for r in newReports.values())
        if size > self.__headroomBytes:
            self.__stats.overflows += 1
            raise HeaderOverflowError(f'header of {size} B exceeds headroom {self.__headroomBytes} B '
                                      f'at node {self.__nodeId} for key {key}')

        bits = HOP_METADATA_BITS + (SHIM_BITS if self.__shimPerHop or pkt.hopIndex == 0 else 0)
        for metric, state, ePrev, hop, vAux, eCurr, insert in pending:
            if not entry.fresh:
                self.__record(pkt.sliceId, metric, pkt.hopIndex, eCurr - state.eLast)
            state.ePrev = ePrev
            state.lastHop = hop
            state.vAux = vAux
            state.eLast = eCurr
            if insert:
                state.eRep = eCurr
                reportBits = 64 if newReports[metric].aux is not None else 32
                bits += reportBits
                self.__stats.insertions += 1
                if forced:
                    self.__stats.forcedInsertions += 1
                    self.__stats.forcedBits += reportBits
                events.append(DataplaneEvent(INSERTED, self.__nodeId, key, metric, eCurr))
            else:
                events.append(DataplaneEvent(SKIPPED, self.__nodeId, key, metric, eCurr))

        entry.fTm = False
        entry.fresh = False
        self.__forwarded[pathKey] = forwarded
        header.hops = hops
        header.reports = newReports
        pkt.headerBytes = size
        pkt.telemetryBits += bits
        return pkt, events

    def __portFor(self, pkt: Packet) -> int:
        path = self.__paths.get(pkt.pathId)
        return path.egressPorts[pkt.hopIndex] if path is not None else 0

    def handleMiss(self, key) -> Optional[MissNotification]:
        """Queues a miss notification for key to the upstream switch on its path."""
        sliceId, pathId, _ = key
        path = self.__paths.get(pathId)
        if path is None or self.__nodeId not in path.hops:
            self.__stats.notificationsDropped += 1
            logger.warning(f'Dropping miss notification for unknown path {pathId} at node {self.__nodeId}')
            return None
        upstream = path.getUpstream(self.__nodeId)
        if upstream is None:
            return None
        notification = MissNotification(sliceId, pathId, self.__nodeId, upstream)
        self.__outbox.append(notification)
        self.__stats.notificationsSent += 1
        return notification

    def onMissNotification(self, notification: MissNotification):
        """Forces full telemetry on the next packet of the notified key, recursing upstream on a miss."""
        self.__stats.notificationsReceived += 1
        path = self.__paths.get(notification.pathId)
        if path is None or self.__nodeId not in path.hops:
            self.__stats.notificationsDropped += 1
            logger.warning(f'Dropping miss notification for unknown path {notification.pathId} '
                           f'at node {self.__nodeId}')
            return
        key = (notification.sliceId, notification.pathId, path.getEgressPort(self.__nodeId))
        entry = self.lookup(key)
        if entry is not None:
            entry.fTm = True
            return
        # A fresh entry reports on its next packet, which reinitializes state at the ingress.
        _, evicted = self.__buckets.insert(key)
        if evicted is not None:
            self.__stats.evictions += 1
            self.handleMiss(evicted.key)
        self.handleMiss(key)
