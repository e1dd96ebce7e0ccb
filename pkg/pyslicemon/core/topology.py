"""
Parameterized three-tier transport topology (access, aggregation, core).
"""
import logging
from typing import Dict, List, Optional, Tuple

from pyslicemon.core import Tier
from pyslicemon.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

HOST_PORT = 0


class Link:
    def __init__(self, src: int, dst: Optional[int], capacityBps: float, propagationNs: int, tier: Tier):
        self.src = src
        self.dst = dst
        self.capacityBps = float(capacityBps)
        self.propagationNs = int(propagationNs)
        self.tier = tier

    def getTransmissionNs(self, nBytes: float) -> int:
        return int(round(nBytes * 8 * 1e9 / self.capacityBps))

    def __repr__(self):
        return (f'Link(src={self.src}, dst={self.dst}, capacityBps={self.capacityBps}, '
                f'propagationNs={self.propagationNs}, tier={self.tier})')


class Topology:
    """Switches, their tiers and directional links.

    Port 0 of an access switch faces its hosts; ports 1.. are numbered in the
    order links were added.
    """

    def __init__(self):
        self.__tiers: Dict[int, Tier] = {}
        self.__ports: Dict[int, Dict[int, Link]] = {}
        self.__portTo: Dict[Tuple[int, int], int] = {}
        self.__links: List[Link] = []

    def addSwitch(self, switchId: int, tier: Tier):
        if not 0 <= switchId < 1024:
            raise ConfigurationError(f'switch id {switchId} does not fit a 10-bit node id', ['switches'])
        self.__tiers[switchId] = tier
        self.__ports[switchId] = {}

    def addHostPort(self, switchId: int, capacityBps: float, propagationNs: int):
        link = Link(switchId, None, capacityBps, propagationNs, self.__tiers[switchId])
        self.__ports[switchId][HOST_PORT] = link
        self.__links.append(link)

    def addLink(self, a: int, b: int, capacityBps: float, propagationNs: int, tier: Tier):
        for src, dst in ((a, b), (b, a)):
            port = len([p for p in self.__ports[src] if p != HOST_PORT]) + 1
            link = Link(src, dst, capacityBps, propagationNs, tier)
            self.__ports[src][port] = link
            self.__portTo[(src, dst)] = port
            self.__links.append(link)

    def getSwitches(self) -> List[int]:
        return sorted(self.__tiers.keys())

    def getSwitchesByTier(self, tier: Tier) -> List[int]:
        return [s for s in self.getSwitches() if self.__tiers[s] == tier]

    def getTier(self, switchId: int) -> Tier:
        return self.__tiers[switchId]

    def getLinks(self) -> List[Link]:
        return list(self.__links)

    def getPorts(self, switchId: int) -> Dict[int, Link]:
        return self.__ports[switchId]

    def getLink(self, switchId: int, port: int) -> Link:
        return self.__ports[switchId][port]

    def getPortTowards(self, src: int, dst: int) -> int:
        return self.__portTo[(src, dst)]

    def getNeighbors(self, switchId: int, tier: Tier) -> List[int]:
        return sorted(link.dst for port, link in self.__ports[switchId].items()
                      if port != HOST_PORT and self.__tiers[link.dst] == tier)

    def scaleCapacities(self, factor: float):
        """Multiplies every link capacity, host ports included, by factor."""
        if factor <= 0:
            raise ConfigurationError(f'capacity factor {factor} must be positive', ['TargetUtilization'])
        for link in self.__links:
            link.capacityBps *= factor

    def route(self, srcAccess: int, dstAccess: int, coreChoice: int = 0) -> Tuple[List[int], List[int]]:
        """Returns (hops, egressPorts) from srcAccess to the hosts behind dstAccess."""
        if srcAccess == dstAccess:
            hops = [srcAccess]
        else:
            srcAgg = self.getNeighbors(srcAccess, Tier.AGGREGATION)[0]
            dstAgg = self.getNeighbors(dstAccess, Tier.AGGREGATION)[0]
            if srcAgg == dstAgg:
                hops = [srcAccess, srcAgg, dstAccess]
            else:
                cores = self.getNeighbors(srcAgg, Tier.CORE)
                core = cores[coreChoice % len(cores)]
                hops = [srcAccess, srcAgg, core, dstAgg, dstAccess]
        ports = [self.getPortTowards(a, b) for a, b in zip(hops, hops[1:])] + [HOST_PORT]
        return hops, ports

    def __repr__(self):
        return f'Topology(switches={len(self.__tiers)}, links={len(self.__links)})'


def buildTopology(nAccess: int = 8, nAggregation: int = 4, nCore: int = 2,
                  capacitiesGbps: Tuple[float, float, float] = (25.0, 40.0, 100.0),
                  scaleFactor: float = 100.0, propagationNs: int = 5000) -> Topology:
    """Builds the three-tier topology with link capacities divided by scaleFactor.

    Access switches attach to one aggregation switch each (round robin); every
    aggregation switch attaches to every core switch; core switches form a chain.
    """
    if min(nAccess, nAggregation, nCore) < 1:
        raise ConfigurationError('every tier needs at least one switch', ['Topology'])
    accessBps, aggBps, coreBps = (c * 1e9 / scaleFactor for c in capacitiesGbps)
    propagation = int(propagationNs * scaleFactor)

    topology = Topology()
    access = list(range(nAccess))
    aggregation = list(range(nAccess, nAccess + nAggregation))
    core = list(range(nAccess + nAggregation, nAccess + nAggregation + nCore))
    for s in access:
        topology.addSwitch(s, Tier.ACCESS)
    for s in aggregation:
        topology.addSwitch(s, Tier.AGGREGATION)
    for s in core:
        topology.addSwitch(s, Tier.CORE)

    for i, s in enumerate(access):
        topology.addHostPort(s, accessBps, propagation)
        topology.addLink(s, aggregation[i % nAggregation], accessBps, propagation, Tier.ACCESS)
    for a in aggregation:
        for c in core:
            topology.addLink(a, c, aggBps, propagation, Tier.AGGREGATION)
    for c1, c2 in zip(core, core[1:]):
        topology.addLink(c1, c2, coreBps, propagation, Tier.CORE)

    logger.debug(f'Built {topology} with capacities {capacitiesGbps} Gbps / {scaleFactor}')
    return topology
