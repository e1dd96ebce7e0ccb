import pytest

from pyslicemon.core import MetricKind, SliceType
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.slices import PathSpec, SliceSpec, TrafficProfile
from pyslicemon.core.topology import buildTopology

SLA = {
    SliceType.URLLC: {MetricKind.LATENCY: 2.0, MetricKind.JITTER: 0.5, MetricKind.LOSS: 5e-6},
    SliceType.EMBB: {MetricKind.LATENCY: 20.0, MetricKind.JITTER: 10.0, MetricKind.LOSS: 5e-3},
    SliceType.MMTC: {MetricKind.LATENCY: 80.0, MetricKind.JITTER: 80.0, MetricKind.LOSS: 0.05},
}


def makeSlice(sliceId, sliceType, paths, sla=None, users=10, rateMbps=5.0, packetBytes=(125, 125),
              fraction=0.05, metrics=None):
    sla = dict(sla or SLA[sliceType])
    if metrics is not None:
        sla = {m: v for m, v in sla.items() if m in metrics}
    tolerances = {m: fraction * v for m, v in sla.items()}
    return SliceSpec(sliceId, sliceType, sla, tolerances, paths, TrafficProfile(packetBytes, rateMbps, users))


@pytest.fixture
def topology():
    return buildTopology()


@pytest.fixture
def config():
    return SimulationConfig(duration=2.0, epoch=0.5, betaSteps=500, bucketWidth=256, candidateCount=8, seed=7)


@pytest.fixture
def slices(topology):
    """One slice of each type on paths of 5, 3 and 1 hops."""
    long = PathSpec(4711, *topology.route(0, 1))
    short = PathSpec(802, *topology.route(0, 4))
    local = PathSpec(31337, *topology.route(2, 2))
    return [
        makeSlice(0, SliceType.URLLC, [long]),
        makeSlice(1, SliceType.EMBB, [short], users=2, rateMbps=20.0, packetBytes=(1000, 1500)),
        makeSlice(2, SliceType.MMTC, [local], users=1000, rateMbps=0.05, packetBytes=(20, 125)),
    ]
