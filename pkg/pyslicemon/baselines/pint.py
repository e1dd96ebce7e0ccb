"""
Probabilistic per-hop telemetry: each hop writes its own latency with some
probability and the collector sums the latest value seen for every hop.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from pyslicemon.core import MetricKind
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.constants import NS_PER_MS, VALUE_BITS
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import SliceSpec
from pyslicemon.core.topology import Topology
from pyslicemon.estimator.distribution import deriveSeed
from pyslicemon.netsim.scheme import MonitoringScheme
from pyslicemon.netsim.simulator import ResultSet, run

logger = logging.getLogger(__name__)

HOP_INDEX_BITS = 8
# One sampled hop value on the wire: the value and the hop it belongs to.
SAMPLE_BITS = VALUE_BITS + HOP_INDEX_BITS
SAMPLING_STREAM = 0x9147


class HopSampleTable:
    """Most recent latency and its timestamp per (slice, path, hop)."""

    def __init__(self):
        self.__latest: Dict[Tuple[int, int, int], Tuple[float, int]] = {}

    def update(self, sliceId: int, pathId: int, hopIndex: int, value: float, timeNs: int):
        self.__latest[(sliceId, pathId, hopIndex)] = (value, timeNs)

    def get(self, sliceId: int, pathId: int, hopIndex: int) -> Optional[Tuple[float, int]]:
        return self.__latest.get((sliceId, pathId, hopIndex))

    def reconstruct(self, sliceId: int, pathId: int, hopCount: int) -> float:
        """Sum of exactly one value per hop; hops never seen count as 0."""
        total = 0.0
        for hop in range(hopCount):
            seen = self.__latest.get((sliceId, pathId, hop))
            if seen is not None:
                total += seen[0]
        return total


def samplingProbability(hopCount: int, budgetBits: Optional[float]) -> float:
    """Per-hop write probability giving an expected budgetBits per packet; 1/H without a budget."""
    if budgetBits is None:
        return 1.0 / hopCount
    return min(1.0, budgetBits / (hopCount * SAMPLE_BITS))


class PintLikeScheme(MonitoringScheme):
    """
    :param budgetBits: Expected telemetry bits per packet; None samples each hop with probability 1/H.
    :type budgetBits: float.
    :param probability: Fixed per-hop probability, overriding the budget.
    :type probability: float.
    """

    NAME = 'pint-like'

    def __init__(self, budgetBits: Optional[float] = None, probability: Optional[float] = None):
        super(PintLikeScheme, self).__init__()
        if budgetBits is not None and budgetBits < SAMPLE_BITS:
            raise ConfigurationError(f'bit budget {budgetBits} is below one hop value ({SAMPLE_BITS} bits)',
                                     ['BudgetBits'])
        if probability is not None and not 0.0 < probability <= 1.0:
            raise ConfigurationError('sampling probability must be in (0, 1]', ['Probability'])
        self.__budgetBits = budgetBits
        self.__probability = probability
        self.__pathProbability: Dict[int, float] = {}
        self.__table = HopSampleTable()
        self.__rng = None
        self.__samples = 0

    def getTable(self) -> HopSampleTable:
        return self.__table

    def attach(self, sim):
        super(PintLikeScheme, self).attach(sim)
        self.__rng = np.random.default_rng(deriveSeed(sim.getConfig().seed, SAMPLING_STREAM))
        for pathId, path in sorted(sim.getPaths().items()):
            p = self.__probability
            if p is None:
                p = samplingProbability(path.getHopCount(), self.__budgetBits)
            self.__pathProbability[pathId] = p
        logger.debug(f'Per-path sampling probabilities: {self.__pathProbability}')

    def getMetrics(self, slice) -> List[MetricKind]:
        return [MetricKind.LATENCY] if MetricKind.LATENCY in slice.getMetrics() else []

    def onEgress(self, switchId: int, pkt, nowNs: int):
        if self.__rng.random() >= self.__pathProbability[pkt.pathId]:
            return
        scale = self.getSimulation().getConfig().scaleFactor
        if pkt.hopSamples is None:
            pkt.hopSamples = {}
        pkt.hopSamples[pkt.hopIndex] = (pkt.egressNs - pkt.ingressNs) / NS_PER_MS / scale
        pkt.headerBytes += SAMPLE_BITS // 8
        pkt.telemetryBits += SAMPLE_BITS

    def onDeliver(self, pkt, nowNs: int):
        if not self.getSimulation().getMetrics(pkt.sliceId):
            return
        view = self.getCollectorView()
        for hop, value in sorted((pkt.hopSamples or {}).items()):
            self.__table.update(pkt.sliceId, pkt.pathId, hop, value, nowNs)
            self.__samples += 1
        hopCount = self.getSimulation().getPaths()[pkt.pathId].getHopCount()
        estimate = self.__table.reconstruct(pkt.sliceId, pkt.pathId, hopCount)
        if pkt.hopSamples:
            view.report(pkt.sliceId, pkt.pathId, MetricKind.LATENCY, nowNs, estimate)
        view.estimate(pkt.sliceId, pkt.pathId, MetricKind.LATENCY, nowNs, estimate)

    def getStats(self) -> dict:
        return {'collector_reports': self.__samples, 'sampling_probability': dict(self.__pathProbability)}


def runPintLike(budgetBits: Optional[float], slices: List[SliceSpec], config: SimulationConfig,
                topology: Optional[Topology] = None, probability: Optional[float] = None) -> ResultSet:
    return run(slices, config, PintLikeScheme(budgetBits, probability), topology)
