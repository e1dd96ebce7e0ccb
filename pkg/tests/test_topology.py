import pytest

from pyslicemon.core import Tier
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import CandidateGrid, PathSpec
from pyslicemon.core.topology import HOST_PORT, buildTopology


def test_default_tiers(topology):
    assert len(topology.getSwitchesByTier(Tier.ACCESS)) == 8
    assert len(topology.getSwitchesByTier(Tier.AGGREGATION)) == 4
    assert len(topology.getSwitchesByTier(Tier.CORE)) == 2


def test_capacities_are_scaled():
    topology = buildTopology(scaleFactor=100.0)
    assert topology.getLink(0, HOST_PORT).capacityBps == pytest.approx(25e9 / 100)
    core = topology.getSwitchesByTier(Tier.CORE)
    port = topology.getPortTowards(core[0], core[1])
    assert topology.getLink(core[0], port).capacityBps == pytest.approx(100e9 / 100)


def test_routes(topology):
    hops, ports = topology.route(0, 4)
    assert hops == [0, 8, 4]
    assert ports == [1, 2, HOST_PORT]
    hops, ports = topology.route(0, 1)
    assert hops == [0, 8, 12, 9, 1]
    assert ports == [1, 3, 2, 1, HOST_PORT]
    assert topology.route(3, 3) == ([3], [HOST_PORT])


def test_path_validation():
    with pytest.raises(ConfigurationError):
        PathSpec(1, [], [])
    with pytest.raises(ConfigurationError):
        PathSpec(1, [0, 1], [1])
    with pytest.raises(ConfigurationError):
        PathSpec(1 << 16, [0], [0])
    path = PathSpec(7, [0, 8, 4], [1, 2, 0])
    assert path.getUpstream(8) == 0
    assert path.getUpstream(0) is None
    assert path.getEgressPort(4) == 0


def test_fixed_point_codes_are_increasing_and_fit():
    codes = CandidateGrid.fixedPointCodes(16, 8)
    assert len(codes) == 16
    assert codes[0] == 1 and codes[-1] == 255
    assert all(b > a for a, b in zip(codes, codes[1:]))
    assert CandidateGrid.fixedPointCodes(255, 8) == list(range(1, 256))


def test_grid_rejects_bad_candidates():
    grid = CandidateGrid()
    with pytest.raises(ConfigurationError):
        grid.add(0, 0, [], 0.1, 8)
    with pytest.raises(ConfigurationError):
        grid.add(0, 0, [0.2, 0.1], 0.1, 8)
    with pytest.raises(ConfigurationError):
        grid.add(0, 0, [float('inf')], 0.1, 8)
    with pytest.raises(ConfigurationError):
        grid.add(0, 0, list(range(5)), 0.1, 2)


def test_grid_for_slices(slices):
    grid = CandidateGrid.forSlices(slices, count=16)
    assert len(grid) == 9
    values = grid.getValues(0, 0)
    step = slices[0].getTolerance(0) * 0.05
    assert values[0] == pytest.approx(step)
    assert values[-1] == pytest.approx(255 * step)
