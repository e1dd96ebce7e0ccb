"""
Value types describing slices, their paths and the candidate-threshold grid.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from pyslicemon.core import MetricKind, SliceType
from pyslicemon.core.errors import AbsentMetricError, ConfigurationError


class TrafficProfile:
    def __init__(self, packetBytes: Tuple[int, int], userRateMbps: float, users: int,
                 burstOnMs: Optional[float] = None, burstOffMs: Optional[float] = None):
        self.packetBytes = (int(packetBytes[0]), int(packetBytes[1]))
        self.userRateMbps = float(userRateMbps)
        self.users = int(users)
        self.burstOnMs = burstOnMs
        self.burstOffMs = burstOffMs

    def getRateBps(self) -> float:
        return self.userRateMbps * 1e6 * self.users

    def getMeanPacketBytes(self) -> float:
        return (self.packetBytes[0] + self.packetBytes[1]) / 2.0

    def isBursty(self) -> bool:
        return bool(self.burstOnMs) and bool(self.burstOffMs)

    def __eq__(self, other):
        return isinstance(other, TrafficProfile) and repr(self) == repr(other)

    def __repr__(self):
        return (f'TrafficProfile(packetBytes={self.packetBytes}, userRateMbps={self.userRateMbps!r}, '
                f'users={self.users}, burstOnMs={self.burstOnMs}, burstOffMs={self.burstOffMs})')


class PathSpec:
    """An ordered list of switches traversed by one of a slice's paths.

    :param pathId: 16-bit path identifier, unique among active paths.
    :type pathId: int.
    :param hops: Switch IDs in forwarding order.
    :type hops: list.
    :param egressPorts: Output port used at each hop.
    :type egressPorts: list.
    """

    def __init__(self, pathId: int, hops: List[int], egressPorts: List[int]):
        if len(hops) < 1:
            raise ConfigurationError('a path needs at least one hop', ['hops'])
        if len(hops) != len(egressPorts):
            raise ConfigurationError('one egress port per hop is required', ['egressPorts'])
        if not 0 <= pathId < (1 << 16):
            raise ConfigurationError(f'path id {pathId} does not fit 16 bits', ['pathId'])
        self.pathId = int(pathId)
        self.hops = [int(h) for h in hops]
        self.egressPorts = [int(p) for p in egressPorts]

    def getHopCount(self) -> int:
        return len(self.hops)

    def getHopIndex(self, switchId: int) -> int:
        return self.hops.index(switchId)

    def getUpstream(self, switchId: int) -> Optional[int]:
        """Returns the switch before switchId on this path, None at the ingress."""
        index = self.getHopIndex(switchId)
        return self.hops[index - 1] if index > 0 else None

    def getEgressPort(self, switchId: int) -> int:
        return self.egressPorts[self.getHopIndex(switchId)]

    def __eq__(self, other):
        return isinstance(other, PathSpec) and repr(self) == repr(other)

    def __repr__(self):
        return f'PathSpec(pathId={self.pathId}, hops={self.hops}, egressPorts={self.egressPorts})'


class SliceSpec:
    def __init__(self, sliceId: int, sliceType: SliceType, slaTargets: Dict[MetricKind, float],
                 tolerances: Dict[MetricKind, float], paths: List[PathSpec], traffic: TrafficProfile):
        self.sliceId = int(sliceId)
        self.sliceType = SliceType(sliceType)
        self.slaTargets = dict(slaTargets)
        self.tolerances = dict(tolerances)
        self.paths = list(paths)
        self.traffic = traffic

    def getMetrics(self) -> List[MetricKind]:
        return sorted(self.slaTargets.keys())

    def getSlaTarget(self, metric: MetricKind) -> float:
        if metric not in self.slaTargets:
            raise AbsentMetricError(f'slice {self.sliceId} has no SLA for {metric}')
        return self.slaTargets[metric]

    def getTolerance(self, metric: MetricKind) -> float:
        if metric not in self.tolerances:
            raise AbsentMetricError(f'slice {self.sliceId} has no tolerance for {metric}')
        return self.tolerances[metric]

    def getLongestPath(self) -> PathSpec:
        return max(self.paths, key=lambda p: (p.getHopCount(), -p.pathId))

    def getCriticalityKey(self, metric: MetricKind):
        # URLLC before eMBB before mMTC, tighter tolerance first, then slice id.
        return (int(self.sliceType), self.tolerances.get(metric, float('inf')), self.sliceId)

    def __eq__(self, other):
        return isinstance(other, SliceSpec) and repr(self) == repr(other)

    def __repr__(self):
        sla = {str(k): v for k, v in sorted(self.slaTargets.items())}
        tol = {str(k): v for k, v in sorted(self.tolerances.items())}
        return (f'SliceSpec(sliceId={self.sliceId}, sliceType={self.sliceType}, slaTargets={sla}, '
                f'tolerances={tol}, paths={self.paths}, traffic={self.traffic})')


class GridEntry:
    def __init__(self, values: Tuple[float, ...], step: float, bitWidth: int):
        self.values = tuple(float(v) for v in values)
        self.step = float(step)
        self.bitWidth = int(bitWidth)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f'GridEntry(values={self.values}, step={self.step}, bitWidth={self.bitWidth})'


class CandidateGrid:
    """Candidate thresholds per (slice, metric), realizable in fixed point."""

    def __init__(self):
        self.__entries: Dict[Tuple[int, MetricKind], GridEntry] = {}

    @staticmethod
    def fixedPointCodes(count: int, bitWidth: int) -> List[int]:
        maxCode = (1 << bitWidth) - 1
        if count > maxCode:
            raise ConfigurationError(f'{count} candidates do not fit {bitWidth} bits', ['CandidateCount'])
        codes = []
        for raw in np.geomspace(1, maxCode, count):
            code = max(int(round(raw)), codes[-1] + 1 if codes else 1)
            codes.append(code)
        # Clamp the tail back under maxCode while keeping codes strictly increasing.
        for i in range(len(codes) - 1, -1, -1):
            limit = maxCode - (len(codes) - 1 - i)
            codes[i] = min(codes[i], limit)
        return codes

    def add(self, sliceId: int, metric: MetricKind, values, step: float, bitWidth: int):
        values = tuple(float(v) for v in values)
        if len(values) == 0:
            raise ConfigurationError('a candidate list cannot be empty', ['Candidates'])
        if any(not np.isfinite(v) or v < 0 for v in values):
            raise ConfigurationError('candidates must be finite and non-negative', ['Candidates'])
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigurationError('candidates must be strictly increasing', ['Candidates'])
        if len(values) > (1 << bitWidth):
            raise ConfigurationError('grid is not realizable in the configured bit width', ['BitWidth'])
        self.__entries[(int(sliceId), MetricKind(metric))] = GridEntry(values, step, bitWidth)

    def get(self, sliceId: int, metric: MetricKind) -> GridEntry:
        return self.__entries[(int(sliceId), MetricKind(metric))]

    def getValues(self, sliceId: int, metric: MetricKind) -> Tuple[float, ...]:
        return self.get(sliceId, metric).values

    def getMinimum(self, sliceId: int, metric: MetricKind) -> float:
        return self.get(sliceId, metric).values[0]

    def getPairs(self) -> List[Tuple[int, MetricKind]]:
        return sorted(self.__entries.keys())

    def __contains__(self, pair):
        return pair in self.__entries

    def __len__(self):
        return len(self.__entries)

    @classmethod
    def forSlices(cls, slices: List[SliceSpec], count: int = 16, stepFraction: float = 0.05,
                  bitWidth: int = 8) -> 'CandidateGrid':
        """Builds a grid whose step is a fraction of each pair's tolerance."""
        grid = cls()
        codes = cls.fixedPointCodes(count, bitWidth)
        for s in slices:
            for metric in s.getMetrics():
                step = s.getTolerance(metric) * stepFraction
                grid.add(s.sliceId, metric, [c * step for c in codes], step, bitWidth)
        return grid

    def __repr__(self):
        return f'CandidateGrid(pairs={len(self.__entries)})'
