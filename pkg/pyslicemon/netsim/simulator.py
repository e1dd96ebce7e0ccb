"""
Packet-level discrete-event simulation of monitored slices over the
three-tier topology.
"""
import copy
import itertools
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import simpy

from pyslicemon.core import EventKind, MetricKind, SliceType
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.constants import NS_PER_MS
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import PathSpec, SliceSpec
from pyslicemon.core.topology import Topology, buildTopology
from pyslicemon.core.workload import calibrateCapacities
from pyslicemon.dataplane.packet import Packet
from pyslicemon.estimator.distribution import deriveSeed
from pyslicemon.netsim.events import schedule
from pyslicemon.netsim.measure import measure
from pyslicemon.netsim.queues import PortQueueSet
from pyslicemon.netsim.collector import GroundTruth
from pyslicemon.netsim.traffic import genTraffic

logger = logging.getLogger(__name__)

# Seed stream tags.
TRACE_STREAM = 0x7ace
SHIFT_STREAM = 0x51f7

SATURATION_UTILIZATION = 0.98
SATURATION_BACKLOG = 0.5

TRACE_COLUMNS = ['time_ns', 'slice', 'path', 'seq', 'hops', 'hop_latencies_ms', 'true_latency_ms',
                 'estimate_ms', 'header_bytes', 'telemetry_bits']


class ResultSet:
    """Outcome of one simulation run.

    :param summary: Aggregate row (scheme, overhead, violation fractions, miss rate, saturation, ...).
    :param slices: Per (slice, metric) accuracy table, see :data:`pyslicemon.netsim.measure.MEASURE_COLUMNS`.
    :param decisions: Per-epoch threshold decisions, empty for schemes without a controller.
    :param trace: Sampled per-packet trace.
    """

    def __init__(self, summary: dict, slices: pd.DataFrame, decisions: pd.DataFrame, trace: pd.DataFrame,
                 truth: Optional[GroundTruth] = None, view=None):
        self.summary = summary
        self.slices = slices
        self.decisions = decisions
        self.trace = trace
        self.truth = truth
        self.view = view

    def getSummary(self) -> dict:
        return self.summary

    def getSliceMetrics(self) -> pd.DataFrame:
        return self.slices

    def getDecisions(self) -> pd.DataFrame:
        return self.decisions

    def getTrace(self) -> pd.DataFrame:
        return self.trace

    def isSaturated(self) -> bool:
        return bool(self.summary.get('saturated'))

    def __repr__(self):
        return f'ResultSet({self.summary})'


class Simulation:
    """
    :param slices: Slices with their paths on topology.
    :type slices: list.
    :param config: Simulation parameters.
    :type config: :class:`pyslicemon.core.config.SimulationConfig`.
    :param scheme: Monitoring scheme plugged into the egress and delivery hooks.
    :type scheme: :class:`pyslicemon.netsim.scheme.MonitoringScheme`.
    :param topology: Defaults to :func:`pyslicemon.core.topology.buildTopology` on config.
    """

    def __init__(self, slices: List[SliceSpec], config: SimulationConfig, scheme, topology: Optional[Topology] = None):
        self.__config = config
        self.__slices: Dict[int, SliceSpec] = {s.sliceId: s for s in slices}
        self.__topology = topology if topology is not None else buildTopology(
            config.nAccess, config.nAggregation, config.nCore, config.tierCapacitiesGbps,
            config.scaleFactor, config.propagationNs)
        self.__scale = config.scaleFactor
        self.__capacityFactor = 1.0
        if config.targetUtilization is not None:
            # Calibrated on a copy so a caller's topology keeps its capacities.
            self.__topology = copy.deepcopy(self.__topology)
            self.__capacityFactor = calibrateCapacities(self.__topology, slices, config.targetUtilization,
                                                        config.scaleFactor)
        self.__paths: Dict[int, PathSpec] = {}
        for s in slices:
            for path in s.paths:
                if path.pathId in self.__paths:
                    raise ConfigurationError(f'path id {path.pathId} is used twice', ['paths'])
                self.__paths[path.pathId] = path

        self.__env = simpy.Environment()
        self.__ports: Dict[Tuple[int, int], PortQueueSet] = {}
        for switchId in self.__topology.getSwitches():
            for port in self.__topology.getPorts(switchId):
                self.__ports[(switchId, port)] = PortQueueSet(config.bufferBytes, config.wrrWeights)
        self.__processingNs = config.processingDelayNs * self.__scale
        self.__truth = GroundTruth()
        self.__forwarded: Dict[Tuple[int, int, int], int] = {}
        self.__seq: Dict[Tuple[int, int], int] = {}
        self.__roundRobin: Dict[int, int] = {}
        self.__metrics: Dict[int, List[MetricKind]] = {}
        self.__inFlight: Dict[int, int] = {}
        self.__wireBits = 0
        self.__telemetryWireBits = 0
        self.__deliveredBits = 0
        self.__deliveredPackets = 0
        self.__trace: List[dict] = []
        self.__traceRng = np.random.default_rng(deriveSeed(config.seed, TRACE_STREAM))

        self.__scheme = scheme
        scheme.attach(self)
        for s in slices:
            self.__metrics[s.sliceId] = list(scheme.getMetrics(s))

    def getConfig(self) -> SimulationConfig:
        return self.__config

    def getTopology(self) -> Topology:
        return self.__topology

    def getPaths(self) -> Dict[int, PathSpec]:
        return self.__paths

    def getSlices(self) -> Dict[int, SliceSpec]:
        return self.__slices

    def getMetrics(self, sliceId: int) -> List[MetricKind]:
        return self.__metrics.get(sliceId, [])

    def getEnvironment(self) -> simpy.Environment:
        return self.__env

    def getTruth(self) -> GroundTruth:
        return self.__truth

    def getNow(self) -> int:
        return int(self.__env.now)

    def getPort(self, switchId: int, port: int) -> PortQueueSet:
        return self.__ports[(switchId, port)]

    def getInFlight(self, sliceId: int) -> int:
        return self.__inFlight.get(sliceId, 0)

    # Traffic sources.
    def __stream(self, s: SliceSpec):
        config = self.__config
        seed = deriveSeed(config.seed, s.sliceId)
        untilNs = config.getDurationNs()
        shift = config.varianceShift
        # Workload-wide bursts apply to slices without a burst profile of their own.
        onMs, offMs = (None, None) if s.traffic.isBursty() else (config.burstOnMs, config.burstOffMs)
        if shift is not None and shift.sliceId == s.sliceId:
            atNs = int(shift.atSeconds * 1e9)
            return itertools.chain(
                genTraffic(s, seed, self.__scale, untilNs=min(atNs, untilNs), burstOnMs=onMs, burstOffMs=offMs),
                genTraffic(s, deriveSeed(seed, SHIFT_STREAM), self.__scale, startNs=atNs, untilNs=untilNs,
                           burstOnMs=shift.onMs, burstOffMs=shift.offMs))
        return genTraffic(s, seed, self.__scale, untilNs=untilNs, burstOnMs=onMs, burstOffMs=offMs)

    def __scheduleNext(self, s: SliceSpec, stream):
        arrival = next(stream, None)
        if arrival is None:
            return
        atNs, size = arrival
        schedule(self.__env, EventKind.PACKET_ARRIVAL, atNs - self.getNow(),
                 lambda event: self.__onGenerated(s, stream, size))

    def __onGenerated(self, s: SliceSpec, stream, size: int):
        turn = self.__roundRobin.get(s.sliceId, 0)
        self.__roundRobin[s.sliceId] = turn + 1
        path = s.paths[turn % len(s.paths)]
        seq = self.__seq.get((s.sliceId, path.pathId), 0) + 1
        self.__seq[(s.sliceId, path.pathId)] = seq
        pkt = Packet(s.sliceId, path.pathId, seq, size, createdNs=self.getNow())
        self.__truth.onGenerated(s.sliceId)
        self.__inFlight[s.sliceId] = self.__inFlight.get(s.sliceId, 0) + 1
        self.__arrive(pkt)
        self.__scheduleNext(s, stream)

    # Packet pipeline.
    def __arrive(self, pkt: Packet):
        path = self.__paths[pkt.pathId]
        switchId, port = path.hops[pkt.hopIndex], path.egressPorts[pkt.hopIndex]
        pkt.ingressNs = self.getNow()
        queue = self.__ports[(switchId, port)]
        if not queue.enqueue(pkt, pkt.getWireBytes(), self.__slices[pkt.sliceId].sliceType):
            self.__truth.onDropped(pkt.sliceId)
            self.__inFlight[pkt.sliceId] -= 1
            return
        if not queue.busy:
            self.__serve(switchId, port)

    def __processingFor(self, pkt: Packet) -> float:
        anti = self.__config.antiCorrelation
        if anti is None or not anti.appliesTo(pkt.sliceId):
            return self.__processingNs
        offsetNs = anti.offsetUs * 1e3 * self.__scale
        even = pkt.seq % 2 == 0
        if pkt.hopIndex == anti.firstHop:
            return self.__processingNs + (2 * offsetNs if even else 0.0)
        if pkt.hopIndex == anti.firstHop + 1:
            return self.__processingNs + (0.0 if even else 2 * offsetNs)
        return self.__processingNs

    def __serve(self, switchId: int, port: int):
        """Starts serializing the next queued packet; processing is pipelined and does not hold the port."""
        queue = self.__ports[(switchId, port)]
        pkt = queue.dequeue()
        if pkt is None:
            queue.busy = False
            return
        queue.busy = True
        now = self.getNow()
        link = self.__topology.getLink(switchId, port)
        wireBefore = pkt.getWireBytes()
        txNs = link.getTransmissionNs(wireBefore)
        pkt.egressNs = now + int(round(self.__processingFor(pkt))) + txNs

        pkt.hopLatencies.append((pkt.egressNs - pkt.ingressNs) / NS_PER_MS / self.__scale)
        counter = (pkt.sliceId, pkt.pathId, pkt.hopIndex)
        forwarded = self.__forwarded.get(counter, 0) + 1
        self.__forwarded[counter] = forwarded
        pkt.hopLoss.append((pkt.upCount - forwarded) / pkt.upCount if pkt.upCount > 0 else 0.0)
        pkt.upCount = forwarded

        self.__scheme.onEgress(switchId, pkt, now)

        wireAfter = pkt.getWireBytes()
        # Bytes inserted at this hop are serialized after the egress timestamp.
        extraNs = max(0, link.getTransmissionNs(wireAfter) - txNs)
        queue.busyNs += txNs + extraNs
        self.__wireBits += 8 * wireAfter
        self.__telemetryWireBits += 8 * pkt.headerBytes
        schedule(self.__env, EventKind.PACKET_DEPARTURE, txNs + extraNs, lambda event: self.__serve(switchId, port))
        self.__forward(pkt, pkt.egressNs + extraNs - now + link.propagationNs)

    def __forward(self, pkt: Packet, delayNs: int):
        pkt.hopIndex += 1
        if pkt.hopIndex < self.__paths[pkt.pathId].getHopCount():
            schedule(self.__env, EventKind.PACKET_ARRIVAL, delayNs, lambda event: self.__arrive(pkt))
        else:
            schedule(self.__env, EventKind.PACKET_ARRIVAL, delayNs, lambda event: self.__deliver(pkt))

    def __deliver(self, pkt: Packet):
        now = self.getNow()
        self.__inFlight[pkt.sliceId] -= 1
        truth = self.__truth.onDelivered(pkt, now, self.getMetrics(pkt.sliceId))
        self.__scheme.onDeliver(pkt, now)
        self.__deliveredBits += pkt.telemetryBits
        self.__deliveredPackets += 1
        sampling = self.__config.traceSampling
        if sampling > 0 and self.__traceRng.random() < sampling:
            self.__trace.append({
                'time_ns': now,
                'slice': pkt.sliceId,
                'path': pkt.pathId,
                'seq': pkt.seq,
                'hops': len(pkt.hopLatencies),
                'hop_latencies_ms': ';'.join(f'{v:.6f}' for v in pkt.hopLatencies),
                'true_latency_ms': truth[MetricKind.LATENCY],
                'estimate_ms': self.__scheme.getCollectorView().getLatest(pkt.sliceId, pkt.pathId, MetricKind.LATENCY),
                'header_bytes': pkt.headerBytes,
                'telemetry_bits': pkt.telemetryBits,
            })

    # Notifications and periodic events.
    def sendNotification(self, notification):
        port = self.__topology.getPortTowards(notification.fromSwitch, notification.toSwitch)
        delayNs = self.__topology.getLink(notification.fromSwitch, port).propagationNs
        schedule(self.__env, EventKind.NOTIFICATION, delayNs,
                 lambda event: self.__scheme.onNotification(notification))

    def __periodic(self, kind: EventKind, periodNs: int, callback):
        def fire(event):
            callback(self.getNow())
            if self.getNow() + periodNs < self.__config.getDurationNs():
                schedule(self.__env, kind, periodNs, fire)

        if periodNs and periodNs < self.__config.getDurationNs():
            schedule(self.__env, kind, periodNs, fire)

    def run(self) -> ResultSet:
        config = self.__config
        epochNs = self.__scheme.getEpochNs()
        if epochNs and config.getDurationNs() < 2 * epochNs:
            raise ConfigurationError('a closed-loop run needs at least two epochs', ['Duration', 'Epoch'])
        logger.info(f'Simulating {len(self.__slices)} slices for {config.duration}s with scheme '
                    f'{self.__scheme.NAME} (seed {config.seed})')
        for sliceId in sorted(self.__slices):
            s = self.__slices[sliceId]
            self.__scheduleNext(s, self.__stream(s))
        self.__periodic(EventKind.EPOCH_BOUNDARY, epochNs or 0, self.__scheme.onEpoch)
        self.__periodic(EventKind.EXPORT, self.__scheme.getExportNs() or 0, self.__scheme.onExport)
        self.__env.run(until=config.getDurationNs())
        result = self.__results()
        logger.info(f'Finished {self.__scheme.NAME}: {result.summary["packets_delivered"]} packets delivered, '
                    f'{result.summary["bits_per_packet"]:.1f} bits/packet')
        return result

    def __saturated(self) -> bool:
        durationNs = self.__config.getDurationNs()
        saturated = False
        for (switchId, port), queue in sorted(self.__ports.items()):
            utilization = queue.busyNs / durationNs
            if utilization >= SATURATION_UTILIZATION or queue.getBytes() > SATURATION_BACKLOG * self.__config.bufferBytes:
                logger.warning(f'Port {switchId}:{port} saturated (utilization {utilization:.2f}, '
                               f'backlog {queue.getBytes()} B)')
                saturated = True
        return saturated

    def __results(self) -> ResultSet:
        config = self.__config
        view = self.__scheme.getCollectorView()
        tolerances = {(sliceId, m): s.getTolerance(m)
                      for sliceId, s in self.__slices.items() for m in self.getMetrics(sliceId)}
        sliceTypes = {sliceId: s.sliceType for sliceId, s in self.__slices.items()}
        table = measure(view, self.__truth, tolerances, sliceTypes, intervalNs=config.exportMs * 1e6)

        stats = self.__scheme.getStats()
        summary = {
            'scheme': self.__scheme.NAME,
            'seed': config.seed,
            'slices': len(self.__slices),
            'packets_generated': sum(self.__truth.generated.values()),
            'packets_delivered': sum(self.__truth.delivered.values()),
            'packets_dropped': sum(self.__truth.dropped.values()),
            'packets_in_flight': sum(self.__inFlight.values()),
            # Sketch exports travel out of band; they are amortized over delivered packets.
            'bits_per_packet': ((self.__deliveredBits + stats.get('out_of_band_bits', 0)) / self.__deliveredPackets
                                if self.__deliveredPackets else np.nan),
            'bandwidth_overhead': self.__telemetryWireBits / self.__wireBits if self.__wireBits else np.nan,
        }
        summary.update(_violationSummary(table))
        p90 = table['p90_error'].dropna()
        summary['p90_error'] = float(p90.mean()) if len(p90) else np.nan
        summary['miss_rate'] = stats.get('miss_rate', np.nan)
        summary['reports_per_sec'] = stats.get('collector_reports', 0) / config.duration
        summary['notifications'] = stats.get('notifications', 0)
        summary['header_overflows'] = stats.get('header_overflows', 0)
        summary['saturated'] = self.__saturated()
        summary['shim_per_hop'] = config.shimPerHop
        summary['capacity_factor'] = self.__capacityFactor
        return ResultSet(summary, table, self.__scheme.getDecisionLog(),
                         pd.DataFrame(self.__trace, columns=TRACE_COLUMNS), self.__truth, view)


def _violationSummary(table: pd.DataFrame) -> dict:
    """Packet-weighted violation fractions overall, per metric and per slice type."""

    def fraction(rows: pd.DataFrame) -> float:
        rows = rows.dropna(subset=['violation_fraction'])
        packets = rows['packets'].sum()
        return float(rows['violations'].sum() / packets) if packets else np.nan

    out = {'violation_fraction': fraction(table)}
    for metric in MetricKind:
        out[f'violation_{str(metric).lower()}'] = fraction(table[table['metric'] == str(metric)])
    for sliceType in SliceType:
        out[f'violation_{str(sliceType).lower()}'] = fraction(table[table['slice_type'] == str(sliceType)])
    urllcLatency = table[(table['slice_type'] == str(SliceType.URLLC)) & (table['metric'] == str(MetricKind.LATENCY))]
    out['violation_urllc_latency'] = fraction(urllcLatency)
    return out


def run(slices: List[SliceSpec], config: SimulationConfig, scheme, topology: Optional[Topology] = None) -> ResultSet:
    """Runs one simulation to completion and measures it."""
    return Simulation(slices, config, scheme, topology).run()
