"""
Per-hop latency histograms exported periodically; the collector convolves
them along each path and reads the P90 of the result.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from pyslicemon.core import MetricKind
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.constants import NS_PER_MS, VALUE_BITS
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import SliceSpec
from pyslicemon.core.topology import Topology
from pyslicemon.netsim.collector import CollectorView
from pyslicemon.netsim.scheme import MonitoringScheme
from pyslicemon.netsim.simulator import ResultSet, run

logger = logging.getLogger(__name__)


class HopHistogram:
    """
    Equal-width bins over [0, upperMs); larger values land in the last bin.

    :param bins: Number of bins, at least 2.
    :param upperMs: Upper edge of the covered latency range.
    """

    def __init__(self, bins: int, upperMs: float):
        if bins < 2:
            raise ConfigurationError(f'a histogram needs at least 2 bins, got {bins}', ['Bins'])
        if upperMs <= 0:
            raise ConfigurationError('histogram range must be positive', ['UpperMs'])
        self.bins = int(bins)
        self.upperMs = float(upperMs)
        self.width = self.upperMs / self.bins
        self.counts = np.zeros(self.bins, dtype=np.int64)

    def binOf(self, valueMs: float) -> int:
        return min(max(int(valueMs // self.width), 0), self.bins - 1)

    def add(self, valueMs: float):
        self.counts[self.binOf(valueMs)] += 1

    def getTotal(self) -> int:
        return int(self.counts.sum())

    def getMidpoints(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) * self.width

    def getDistribution(self) -> np.ndarray:
        total = self.getTotal()
        if total == 0:
            return np.zeros(self.bins)
        return self.counts / total

    def reset(self):
        self.counts[:] = 0


def convolve(distributions: Sequence[np.ndarray]) -> np.ndarray:
    """Distribution of the sum of bin indices of independent hops."""
    out = np.ones(1)
    for dist in distributions:
        out = np.convolve(out, dist)
    return out


def convolvedSupport(histograms: Sequence[HopHistogram]) -> Tuple[np.ndarray, np.ndarray]:
    """(values ms, probabilities) of the sum of per-hop bin midpoints; all histograms share one width."""
    dist = convolve([h.getDistribution() for h in histograms])
    width = histograms[0].width
    values = (np.arange(dist.size) + 0.5 * len(histograms)) * width
    return values, dist


def quantile(values: np.ndarray, probabilities: np.ndarray, q: float = 0.9) -> float:
    order = np.argsort(values, kind='stable')
    cdf = np.cumsum(probabilities[order])
    cdf /= cdf[-1]
    return float(values[order][np.searchsorted(cdf, q - 1e-12)])


class SketchLikeScheme(MonitoringScheme):
    """
    :param bins: Bins per hop histogram.
    :type bins: int.
    :param exportMs: Export period in simulated milliseconds.
    :type exportMs: float.
    """

    NAME = 'sketch-like'

    def __init__(self, bins: int = 10, exportMs: Optional[float] = None):
        super(SketchLikeScheme, self).__init__()
        if bins < 2:
            raise ConfigurationError(f'a histogram needs at least 2 bins, got {bins}', ['Bins'])
        self.__bins = int(bins)
        self.__exportMs = exportMs
        self.__histograms: Dict[Tuple[int, int, int], HopHistogram] = {}
        self.__packets: Dict[Tuple[int, int], int] = {}
        self.__exports = 0
        self.__exportBits = 0
        self._setCollectorView(CollectorView(perPacket=False))

    def attach(self, sim):
        super(SketchLikeScheme, self).attach(sim)
        if self.__exportMs is None:
            self.__exportMs = sim.getConfig().exportMs
        for sliceId, s in sorted(sim.getSlices().items()):
            if MetricKind.LATENCY not in s.getMetrics():
                continue
            upperMs = 2.0 * s.getSlaTarget(MetricKind.LATENCY)
            for path in s.paths:
                for hop in range(path.getHopCount()):
                    self.__histograms[(sliceId, path.pathId, hop)] = HopHistogram(self.__bins, upperMs)

    def getHistograms(self) -> Dict[Tuple[int, int, int], HopHistogram]:
        return self.__histograms

    def getMetrics(self, slice) -> List[MetricKind]:
        return [MetricKind.LATENCY] if MetricKind.LATENCY in slice.getMetrics() else []

    def getExportNs(self) -> Optional[int]:
        return int(round(self.__exportMs * 1e6))

    def onEgress(self, switchId: int, pkt, nowNs: int):
        histogram = self.__histograms.get((pkt.sliceId, pkt.pathId, pkt.hopIndex))
        if histogram is not None:
            scale = self.getSimulation().getConfig().scaleFactor
            histogram.add((pkt.egressNs - pkt.ingressNs) / NS_PER_MS / scale)

    def onDeliver(self, pkt, nowNs: int):
        key = (pkt.sliceId, pkt.pathId)
        self.__packets[key] = self.__packets.get(key, 0) + 1

    def onExport(self, nowNs: int):
        sim = self.getSimulation()
        interval = nowNs // self.getExportNs() - 1
        for sliceId, s in sorted(sim.getSlices().items()):
            parts = []
            for path in s.paths:
                histograms = [self.__histograms.get((sliceId, path.pathId, hop)) for hop in range(path.getHopCount())]
                if any(h is None or h.getTotal() == 0 for h in histograms):
                    continue
                values, dist = convolvedSupport(histograms)
                weight = self.__packets.get((sliceId, path.pathId), 0) or histograms[-1].getTotal()
                parts.append((values, dist * weight))
                self.__exportBits += len(histograms) * self.__bins * VALUE_BITS
            if parts:
                values = np.concatenate([p[0] for p in parts])
                weights = np.concatenate([p[1] for p in parts])
                self.getCollectorView().reportP90(sliceId, interval, quantile(values, weights, 0.9))
        for histogram in self.__histograms.values():
            histogram.reset()
        self.__packets = {}
        self.__exports += 1

    def getStats(self) -> dict:
        return {'collector_reports': self.__exports, 'out_of_band_bits': self.__exportBits}


def runSketchLike(bins: int, exportMs: Optional[float], slices: List[SliceSpec], config: SimulationConfig,
                  topology: Optional[Topology] = None) -> ResultSet:
    if exportMs is not None and exportMs != config.exportMs:
        # P90 intervals are measured on the export period.
        config = config.replace(exportMs=float(exportMs))
    return run(slices, config, SketchLikeScheme(bins, exportMs), topology)
