"""
Long-running end-to-end checks, deselected by default; run with ``pytest -m slow``.
"""
import math

import numpy as np
import pandas as pd
import pytest

from pyslicemon.baselines.sketch import runSketchLike
from pyslicemon.baselines.static import StaticPolicy, runStatic
from pyslicemon.core import MetricKind, SliceType
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.slices import PathSpec
from pyslicemon.core.workload import makeWorkload
from pyslicemon.dataplane.buckets import BucketArrays
from pyslicemon.dataplane.packet import Packet
from pyslicemon.dataplane.switch import SwitchState
from pyslicemon.estimator.tradeoff import errorBound
from pyslicemon.experiments.micro import TAU_SECONDS, bucketBenchmark, cmdMicro
from pyslicemon.experiments.runner import buildTopologyFor, runAdaptive
from pyslicemon.netsim.measure import p90Series

pytestmark = pytest.mark.slow

LAT = MetricKind.LATENCY
JIT = MetricKind.JITTER

# Desk-scale closed-loop scenario: busiest port at 90% of its capacity, every
# slice sending in synchronized 0.5 ms ON/OFF bursts.
CLOSED_LOOP = {
    'scaleFactor': 1000.0,
    'duration': 12.0,
    'epoch': 3.0,
    'targetUtilization': 0.9,
    'burstOnMs': 0.5,
    'burstOffMs': 0.5,
}
STATIC_DELTAS = (1.0, 2.0, 5.0, 10.0, 20.0)


@pytest.mark.parametrize('delta', [0.1, 0.2, 0.4])
def test_observed_error_stays_under_the_bound(delta):
    hops = [1, 2, 3, 4]
    paths = {1: PathSpec(1, hops, [1, 1, 1, 0])}
    switches = [SwitchState(h, BucketArrays(2, 64, seed=h), paths) for h in hops]
    rng = np.random.default_rng(17)
    n = 100_000
    latencies = 1.0 + rng.exponential(0.2, (n, len(hops)))
    errors = np.empty(n)
    for seq in range(n):
        pkt = Packet(0, 1, seq + 1, 100)
        for hopIndex, switch in enumerate(switches):
            pkt.hopIndex = hopIndex
            pkt.ingressNs = 0
            pkt.egressNs = int(round(latencies[seq, hopIndex] * 1e6))
            switch.processPacket(pkt, {LAT: delta})
        carried = switches[-1].lookup((0, 1, 0)).getMetric(LAT).eLast
        errors[seq] = abs(carried - latencies[seq].sum())

    betas = [(s.getStats().insertions - 1) / (n - 1) for s in switches[:-1]]
    bound = errorBound(delta, betas)
    # One-sided 99% test that the mean error does not exceed the bound.
    assert errors.mean() - 2.33 * errors.std(ddof=1) / math.sqrt(n) <= bound
    assert bound < (len(hops) - 1) * delta
    assert errorBound(delta, [0.0] * (len(hops) - 1)) == pytest.approx((len(hops) - 1) * delta)


@pytest.mark.parametrize('hashSeed', [1, 2, 3, 4, 5])
def test_bucket_sizing_across_hash_seeds(hashSeed):
    row = bucketBenchmark(2, 4096, nKeys=1000, hashSeed=hashSeed)
    assert row['miss_rate'] < 0.03
    assert row['recovery_overhead'] < 0.05


def test_sketch_p90_is_coarser_than_change_triggered(slices, topology):
    config = SimulationConfig(duration=10.0, epoch=5.0, exportMs=500.0, seed=21)
    changeTriggered = runStatic(StaticPolicy(delta=0.01), slices, config, topology)
    sketch = runSketchLike(10, 500.0, slices, config, topology)
    intervalNs = config.exportMs * 1e6
    for s in slices:
        ct = p90Series(changeTriggered.view, changeTriggered.truth, s.sliceId, intervalNs).set_index('interval')
        sk = p90Series(sketch.view, sketch.truth, s.sliceId, intervalNs).set_index('interval')
        both = ct[['error']].join(sk[['error']], lsuffix='_ct', rsuffix='_sketch').dropna()
        assert len(both) >= 10
        assert (both['error_sketch'] > both['error_ct']).mean() >= 0.9


def tightWorkload(mix, config, nSlices=30, below=0.008, atLeast=2):
    """First seed whose workload puts atLeast URLLC slices with a jitter tolerance under below ms on 5-hop paths.

    Queueing under weighted round robin moves URLLC jitter by microseconds, so
    a draw without such slices leaves no URLLC tolerance any threshold can miss.
    """
    topology = buildTopologyFor(config)
    for seed in range(1, 2000):
        slices = makeWorkload(mix, nSlices, seed, topology, config.pathsPerSlice, config.toleranceFraction)
        tight = [s for s in slices if s.sliceType == SliceType.URLLC and s.getTolerance(JIT) < below
                 and s.getLongestPath().getHopCount() == 5]
        if len(tight) >= atLeast:
            return seed, slices
    pytest.fail(f'no {mix} workload with {atLeast} tight URLLC slices')


@pytest.mark.parametrize('mix', ['SP', 'BAL', 'LP'])
def test_adaptive_beats_static_thresholds_on_urllc(mix):
    config = SimulationConfig(**CLOSED_LOOP)
    seed, slices = tightWorkload(mix, config)
    config = config.replace(seed=seed)
    topology = buildTopologyFor(config)

    adaptive = runAdaptive(slices, config, topology).getSummary()
    static = [runStatic(StaticPolicy(delta=d), slices, config, topology).getSummary() for d in STATIC_DELTAS]
    for summary in [adaptive] + static:
        assert not summary['saturated']
        assert summary['packets_dropped'] == 0

    # The best static point among those at equal or lower overhead.
    cheaper = [s for s in static if s['bits_per_packet'] <= adaptive['bits_per_packet']]
    assert cheaper
    best = min(s['violation_urllc'] for s in cheaper)
    assert adaptive['violation_urllc'] < best

    if mix == 'BAL':
        perType = {SliceType.URLLC: 1.0, SliceType.EMBB: 5.0, SliceType.MMTC: 10.0}
        aware = runStatic(StaticPolicy(perType=perType), slices, config, topology).getSummary()
        assert adaptive['violation_urllc'] <= aware['violation_urllc']


def test_tau_sweep_ranks_every_epoch_length(tmp_path):
    config = SimulationConfig(scaleFactor=1000.0, duration=10.0, targetUtilization=0.5, seed=5)
    cmdMicro('tau', str(tmp_path), config, 'BAL', nSlices=12, workers=2)
    table = pd.read_csv(tmp_path / 'micro_tau.csv')
    assert table['tau'].tolist() == list(TAU_SECONDS)
    assert not table['saturated'].any()
    assert (table['bits_per_packet'] > 0).all()
    assert table['violation_fraction'].between(0.0, 1.0).all()
    assert table['best'].sum() == 1
    best = table.loc[table['best']].iloc[0]
    assert best['rank_sum'] == pytest.approx(table['rank_sum'].min())
    ties = table[table['rank_sum'] == table['rank_sum'].min()]
    assert best['violation_fraction'] == ties['violation_fraction'].min()
