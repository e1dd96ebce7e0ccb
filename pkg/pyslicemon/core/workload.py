"""
Workload generation from the built-in SLA table, plus YAML persistence.
"""
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from pyslicemon.core import MetricKind, SliceType, Tier, WorkloadMix
from pyslicemon.core.constants import (DEFAULT_TOLERANCE_FRACTION, MIX_FRACTIONS, PATH_ID_BITS,
                                       SLA_TABLE, SLA_TABLE_VERSION)
from pyslicemon.core.errors import AbsentMetricError, ConfigurationError
from pyslicemon.core.slices import PathSpec, SliceSpec, TrafficProfile
from pyslicemon.core.topology import Topology, buildTopology

logger = logging.getLogger(__name__)


def parseMix(mix) -> WorkloadMix:
    if isinstance(mix, WorkloadMix):
        return mix
    try:
        return WorkloadMix[str(mix).upper()]
    except KeyError:
        raise ConfigurationError(f'unknown workload mix <{mix}>', ['Mix'])


def typeCounts(mix: WorkloadMix, nSlices: int) -> Dict[SliceType, int]:
    """Splits nSlices across slice types by largest remainder."""
    fractions = MIX_FRACTIONS[mix]
    raw = [f * nSlices for f in fractions]
    counts = [int(math.floor(r + 1e-9)) for r in raw]
    remainders = sorted(range(3), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in remainders[:nSlices - sum(counts)]:
        counts[i] += 1
    return {SliceType(i): counts[i] for i in range(3)}


def toleranceOf(slice: SliceSpec, metric: MetricKind, fraction: float = DEFAULT_TOLERANCE_FRACTION) -> float:
    """
    :param slice: Slice whose SLA is read.
    :param metric: Metric to read.
    :param fraction: Tolerance as a fraction of the SLA target.
    :return: fraction times the slice's SLA target for metric.
    """
    if metric not in slice.slaTargets:
        raise AbsentMetricError(f'slice {slice.sliceId} defines no SLA for {metric}')
    return fraction * slice.slaTargets[metric]


def pathCollisionProbability(nPaths: int, bits: int = PATH_ID_BITS) -> float:
    """Birthday bound on at least one collision among nPaths random ids."""
    space = float(1 << bits)
    return 1.0 - math.exp(-nPaths * (nPaths - 1) / (2.0 * space))


def drawPathIds(rng: np.random.Generator, count: int, bits: int = PATH_ID_BITS) -> List[int]:
    ids, seen = [], set()
    while len(ids) < count:
        candidate = int(rng.integers(0, 1 << bits))
        if candidate in seen:
            logger.debug(f'Path id {candidate} collided, redrawing')
            continue
        seen.add(candidate)
        ids.append(candidate)
    return ids


def makeWorkload(mix, nSlices: int, seed: int, topology: Optional[Topology] = None,
                 pathsPerSlice: int = 1, toleranceFraction: float = DEFAULT_TOLERANCE_FRACTION,
                 slaTable: Optional[dict] = None) -> List[SliceSpec]:
    """Draws nSlices slices for the given mix; a pure function of its arguments."""
    mix = parseMix(mix)
    if nSlices < 3:
        raise ConfigurationError('a workload needs at least three slices', ['Slices'])
    table = slaTable or SLA_TABLE
    topology = topology or buildTopology()
    access = topology.getSwitchesByTier(Tier.ACCESS)

    rng = np.random.default_rng(seed)
    counts = typeCounts(mix, nSlices)
    pathIds = drawPathIds(rng, nSlices * pathsPerSlice)

    slices = []
    sliceId = 0
    for sliceType in SliceType:
        row = table[sliceType]
        for _ in range(counts[sliceType]):
            sla = {m: float(rng.uniform(lo, hi)) for m, (lo, hi) in sorted(row['Sla'].items())}
            tolerances = {m: toleranceFraction * a for m, a in sla.items()}
            sizes = sorted(int(x) for x in rng.integers(row['PacketBytes'][0], row['PacketBytes'][1] + 1, size=2))
            traffic = TrafficProfile(
                packetBytes=(sizes[0], sizes[1]),
                userRateMbps=float(rng.uniform(*row['UserRateMbps'])),
                users=int(rng.integers(row['Users'][0], row['Users'][1] + 1)))
            src = int(rng.choice(access))
            dst = int(rng.choice([a for a in access if a != src])) if len(access) > 1 else src
            paths = []
            for p in range(pathsPerSlice):
                hops, ports = topology.route(src, dst, coreChoice=p)
                paths.append(PathSpec(pathIds[sliceId * pathsPerSlice + p], hops, ports))
            slices.append(SliceSpec(sliceId, sliceType, sla, tolerances, paths, traffic))
            sliceId += 1

    logger.info(f'Generated {nSlices} slices for mix {mix}: {dict((str(k), v) for k, v in counts.items())}')
    return slices


def offeredLoad(slices: List[SliceSpec]) -> Dict[Tuple[int, int], float]:
    """Mean full-scale bits per second offered to each (switch, egress port).

    A slice's rate is split evenly over its paths.
    """
    load: Dict[Tuple[int, int], float] = {}
    for s in slices:
        share = s.traffic.getRateBps() / len(s.paths)
        for path in s.paths:
            for switchId, port in zip(path.hops, path.egressPorts):
                load[(switchId, port)] = load.get((switchId, port), 0.0) + share
    return load


def calibrateCapacities(topology: Topology, slices: List[SliceSpec], targetUtilization: float,
                        scaleFactor: float = 1.0) -> float:
    """Rescales every link by one common factor so the busiest port runs at targetUtilization.

    Tier capacity ratios are kept. Capacities in topology are already divided
    by scaleFactor.

    :return: The factor applied to the capacities.
    """
    if not 0.0 < targetUtilization < 1.0:
        raise ConfigurationError(f'target utilization {targetUtilization} outside (0, 1)', ['TargetUtilization'])
    utilization = {key: bps / (topology.getLink(*key).capacityBps * scaleFactor)
                   for key, bps in offeredLoad(slices).items()}
    if not utilization or max(utilization.values()) <= 0:
        logger.warning('No offered load, keeping link capacities')
        return 1.0
    busiest = max(sorted(utilization), key=utilization.get)
    factor = utilization[busiest] / targetUtilization
    topology.scaleCapacities(factor)
    logger.info(f'Port {busiest[0]}:{busiest[1]} offered {utilization[busiest]:.3f} of its capacity; '
                f'scaled all links by {factor:.4f} to reach {targetUtilization}')
    return factor


def loadSlaTable(file_path: str) -> dict:
    with open(file_path, 'r') as f:
        content = yaml.safe_load(f)
    table = {}
    for typeName, row in content['SliceTypes'].items():
        table[SliceType.fromString(typeName)] = {
            'Sla': {MetricKind[m.upper()]: tuple(r) for m, r in row['Sla'].items()},
            'PacketBytes': tuple(row['PacketBytes']),
            'UserRateMbps': tuple(row['UserRateMbps']),
            'Users': tuple(row['Users']),
        }
    return table


def _trafficToDict(traffic) -> dict:
    out = {'PacketBytes': list(traffic.packetBytes), 'UserRateMbps': traffic.userRateMbps, 'Users': traffic.users}
    if traffic.isBursty():
        out.update({'BurstOnMs': traffic.burstOnMs, 'BurstOffMs': traffic.burstOffMs})
    return out


def workloadToDict(slices: List[SliceSpec]) -> dict:
    return {
        'SlaTableVersion': SLA_TABLE_VERSION,
        'Slices': [{
            'SliceId': s.sliceId,
            'SliceType': str(s.sliceType),
            'SlaTargets': {str(m): v for m, v in sorted(s.slaTargets.items())},
            'Tolerances': {str(m): v for m, v in sorted(s.tolerances.items())},
            'Paths': [{'PathId': p.pathId, 'Hops': p.hops, 'EgressPorts': p.egressPorts} for p in s.paths],
            'Traffic': _trafficToDict(s.traffic),
        } for s in slices],
    }


def workloadFromDict(content: dict) -> List[SliceSpec]:
    slices = []
    for s in content['Slices']:
        traffic = s['Traffic']
        slices.append(SliceSpec(
            sliceId=s['SliceId'],
            sliceType=SliceType.fromString(s['SliceType']),
            slaTargets={MetricKind[m]: float(v) for m, v in s['SlaTargets'].items()},
            tolerances={MetricKind[m]: float(v) for m, v in s['Tolerances'].items()},
            paths=[PathSpec(p['PathId'], p['Hops'], p['EgressPorts']) for p in s['Paths']],
            traffic=TrafficProfile(tuple(traffic['PacketBytes']), traffic['UserRateMbps'], traffic['Users'],
                                   traffic.get('BurstOnMs'), traffic.get('BurstOffMs'))))
    return slices


def saveWorkload(slices: List[SliceSpec], file_path: str):
    with open(file_path, 'w') as f:
        yaml.safe_dump(workloadToDict(slices), f, sort_keys=False)


def loadWorkload(file_path: str) -> List[SliceSpec]:
    with open(file_path, 'r') as f:
        return workloadFromDict(yaml.safe_load(f))
