import pytest

from pyslicemon.core import MetricKind, SliceType, Tier, WorkloadMix
from pyslicemon.core.constants import SLA_TABLE
from pyslicemon.core.errors import AbsentMetricError, ConfigurationError
from pyslicemon.core.slices import PathSpec
from pyslicemon.core.topology import HOST_PORT, buildTopology
from pyslicemon.core.workload import (calibrateCapacities, loadWorkload, makeWorkload, offeredLoad, parseMix,
                                      pathCollisionProbability, saveWorkload, toleranceOf, typeCounts)

from conftest import makeSlice


def test_bal_split_is_even():
    assert typeCounts(WorkloadMix.BAL, 300) == {SliceType.URLLC: 100, SliceType.EMBB: 100, SliceType.MMTC: 100}


def test_sp_and_lp_splits():
    assert typeCounts(WorkloadMix.SP, 300) == {SliceType.URLLC: 180, SliceType.EMBB: 60, SliceType.MMTC: 60}
    assert typeCounts(WorkloadMix.LP, 300) == {SliceType.URLLC: 60, SliceType.EMBB: 180, SliceType.MMTC: 60}


def test_uneven_split_uses_largest_remainder():
    counts = typeCounts(WorkloadMix.BAL, 4)
    assert sum(counts.values()) == 4
    assert counts[SliceType.URLLC] == 2


def test_unknown_mix_is_rejected():
    with pytest.raises(ConfigurationError):
        parseMix('XL')


def test_workload_draws_within_sla_table(topology):
    slices = makeWorkload('BAL', 30, seed=11, topology=topology)
    assert len(slices) == 30
    for s in slices:
        row = SLA_TABLE[s.sliceType]
        for metric, (lo, hi) in row['Sla'].items():
            assert lo <= s.getSlaTarget(metric) <= hi
            assert s.getTolerance(metric) == pytest.approx(0.05 * s.getSlaTarget(metric))
        assert row['PacketBytes'][0] <= s.traffic.packetBytes[0] <= s.traffic.packetBytes[1] <= row['PacketBytes'][1]
        assert row['Users'][0] <= s.traffic.users <= row['Users'][1]
        path = s.paths[0]
        assert topology.getTier(path.hops[0]) == Tier.ACCESS
        assert topology.getTier(path.hops[-1]) == Tier.ACCESS
        assert path.egressPorts[-1] == 0


def test_workload_is_a_pure_function_of_its_seed(topology):
    a = makeWorkload('SP', 12, seed=3, topology=topology)
    b = makeWorkload('SP', 12, seed=3, topology=topology)
    c = makeWorkload('SP', 12, seed=4, topology=topology)
    assert a == b
    assert a != c


def test_path_ids_are_unique(topology):
    slices = makeWorkload('LP', 300, seed=5, topology=topology, pathsPerSlice=2)
    ids = [p.pathId for s in slices for p in s.paths]
    assert len(ids) == len(set(ids)) == 600


def test_two_paths_take_different_cores(topology):
    slices = makeWorkload('BAL', 30, seed=5, topology=topology, pathsPerSlice=2)
    fiveHop = [s for s in slices if s.paths[0].getHopCount() == 5]
    assert fiveHop
    for s in fiveHop:
        assert s.paths[0].hops[2] != s.paths[1].hops[2]


def test_collision_probability_grows_with_paths():
    assert pathCollisionProbability(1) == 0.0
    assert pathCollisionProbability(300) < pathCollisionProbability(600) < 1.0


def test_tolerance_of_absent_metric():
    s = makeSlice(0, SliceType.URLLC, [], metrics=[MetricKind.LATENCY])
    assert toleranceOf(s, MetricKind.LATENCY, 0.1) == pytest.approx(0.2)
    with pytest.raises(AbsentMetricError):
        toleranceOf(s, MetricKind.LOSS)


def test_too_few_slices():
    with pytest.raises(ConfigurationError):
        makeWorkload('BAL', 2, seed=1)


def test_workload_yaml_round_trip(tmp_path, topology):
    slices = makeWorkload('BAL', 6, seed=9, topology=topology)
    path = tmp_path / 'workload.yaml'
    saveWorkload(slices, str(path))
    assert loadWorkload(str(path)) == slices


def test_offered_load_follows_the_paths(slices):
    load = offeredLoad(slices)
    # URLLC (50 Mbps) and eMBB (40 Mbps) leave switch 0 on the same uplink.
    assert load[(0, 1)] == pytest.approx(90e6)
    assert load[(8, 3)] == pytest.approx(50e6)
    assert load[(8, 2)] == pytest.approx(40e6)
    assert load[(2, HOST_PORT)] == pytest.approx(50e6)


def test_offered_load_splits_over_paths(topology):
    paths = [PathSpec(1, *topology.route(0, 1, coreChoice=0)), PathSpec(2, *topology.route(0, 1, coreChoice=1))]
    load = offeredLoad([makeSlice(0, SliceType.EMBB, paths, users=1, rateMbps=10.0)])
    assert load[(0, 1)] == pytest.approx(10e6)
    assert load[(8, 3)] == pytest.approx(5e6)
    assert load[(8, 4)] == pytest.approx(5e6)


def test_calibration_puts_the_busiest_port_at_the_target(slices):
    topology = buildTopology(scaleFactor=100.0)
    factor = calibrateCapacities(topology, slices, 0.5, scaleFactor=100.0)
    assert factor == pytest.approx(90e6 / 25e9 / 0.5)
    assert topology.getLink(0, 1).capacityBps * 100.0 == pytest.approx(90e6 / 0.5)
    core = topology.getSwitchesByTier(Tier.CORE)
    port = topology.getPortTowards(core[0], core[1])
    assert topology.getLink(core[0], port).capacityBps == pytest.approx(100e9 / 100.0 * factor)
    utilization = [bps / (topology.getLink(*key).capacityBps * 100.0) for key, bps in offeredLoad(slices).items()]
    assert max(utilization) == pytest.approx(0.5)


def test_calibration_rejects_a_full_link(slices, topology):
    with pytest.raises(ConfigurationError):
        calibrateCapacities(topology, slices, 1.0)
