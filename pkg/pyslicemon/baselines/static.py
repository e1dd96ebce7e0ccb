"""
Static thresholds fixed for the whole run, slice-agnostic or per slice type.
"""
import logging
from typing import Dict, List, Optional

import pandas as pd

from pyslicemon.core import MetricKind, Provenance, SliceType
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import SliceSpec
from pyslicemon.core.topology import Topology
from pyslicemon.controlplane.controller import DECISION_COLUMNS
from pyslicemon.netsim.scheme import ChangeTriggeredScheme
from pyslicemon.netsim.simulator import ResultSet, run

logger = logging.getLogger(__name__)

# A static Δ is a multiple of one unit of its metric (ms, ms, loss fraction).
DELTA_UNITS = {
    MetricKind.LATENCY: 0.1,
    MetricKind.JITTER: 0.1,
    MetricKind.LOSS: 1e-4,
}


class StaticPolicy:
    """
    :param delta: Global Δ, in metric units, applied to every slice (slice-agnostic).
    :type delta: float.
    :param perType: Δ per slice type (slice-aware); overrides delta.
    :type perType: dict.
    """

    def __init__(self, delta: Optional[float] = None, perType: Optional[Dict[SliceType, float]] = None,
                 units: Optional[Dict[MetricKind, float]] = None):
        if delta is None and not perType:
            raise ConfigurationError('a static policy needs a global delta or one per slice type', ['Delta'])
        values = list(perType.values()) if perType else [delta]
        if any(v <= 0 for v in values):
            raise ConfigurationError('static deltas must be positive', ['Delta'])
        self.delta = delta
        self.perType = dict(perType) if perType else None
        self.units = dict(units) if units else dict(DELTA_UNITS)

    def isSliceAware(self) -> bool:
        return self.perType is not None

    def getName(self) -> str:
        return 'static-aware' if self.isSliceAware() else 'static-agnostic'

    def thresholdFor(self, slice: SliceSpec, metric: MetricKind) -> float:
        if self.perType is not None:
            if slice.sliceType not in self.perType:
                raise ConfigurationError(f'no static delta for slice type {slice.sliceType}', [str(slice.sliceType)])
            multiple = self.perType[slice.sliceType]
        else:
            multiple = self.delta
        return multiple * self.units[metric]

    def assignment(self, slices: List[SliceSpec]) -> Dict:
        return {(s.sliceId, m): self.thresholdFor(s, m) for s in slices for m in s.getMetrics()}

    def __repr__(self):
        return f'StaticPolicy(delta={self.delta}, perType={self.perType})'


class StaticController:
    """Deploys the policy once; epochs never change it."""

    CLOSED_LOOP = False

    def __init__(self, policy: StaticPolicy, slices: List[SliceSpec]):
        self.__policy = policy
        self.__assignment = policy.assignment(slices)

    def getAssignment(self):
        return dict(self.__assignment)

    def start(self, ctx):
        ctx.deployThresholds(self.__assignment)
        logger.info(f'Deployed {self.__policy} on {len(self.__assignment)} (slice, metric) pairs')

    def runEpoch(self, ctx):
        ctx.pollReservoirs()

    def getDecisionLog(self) -> pd.DataFrame:
        rows = [{'epoch': 0, 'slice': sliceId, 'metric': str(metric), 'delta': delta, 'E': None, 'Gamma': None,
                 'feasible': None, 'provenance': str(Provenance.STATIC), 'solve_ms': 0.0, 'build_ms': 0.0}
                for (sliceId, metric), delta in sorted(self.__assignment.items())]
        return pd.DataFrame(rows, columns=DECISION_COLUMNS)


def runStatic(policy: StaticPolicy, slices: List[SliceSpec], config: SimulationConfig,
              topology: Optional[Topology] = None) -> ResultSet:
    """Same data plane as the adaptive system with thresholds fixed by policy."""
    scheme = ChangeTriggeredScheme(StaticController(policy, slices), name=policy.getName())
    return run(slices, config, scheme, topology)
