import itertools
import math

import numpy as np
import pytest

from pyslicemon.baselines.pint import SAMPLE_BITS, HopSampleTable, PintLikeScheme, runPintLike, samplingProbability
from pyslicemon.baselines.sketch import (HopHistogram, SketchLikeScheme, convolve, convolvedSupport, quantile,
                                         runSketchLike)
from pyslicemon.baselines.static import StaticPolicy, runStatic
from pyslicemon.core import MetricKind, SliceType, Tier
from pyslicemon.core.config import AntiCorrelation, SimulationConfig
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import PathSpec
from pyslicemon.core.topology import Topology

from conftest import makeSlice

LAT = MetricKind.LATENCY


def latencyRow(result):
    table = result.getSliceMetrics()
    return table[(table['slice'] == 0) & (table['metric'] == str(LAT))].iloc[0]


# Static thresholds

def test_static_agnostic_assignment(slices):
    policy = StaticPolicy(delta=3.0)
    assignment = policy.assignment(slices)
    assert policy.getName() == 'static-agnostic'
    assert assignment[(0, MetricKind.LATENCY)] == pytest.approx(0.3)
    assert assignment[(1, MetricKind.JITTER)] == pytest.approx(0.3)
    assert assignment[(2, MetricKind.LOSS)] == pytest.approx(3e-4)


def test_static_aware_assignment(slices):
    policy = StaticPolicy(perType={SliceType.URLLC: 1.0, SliceType.EMBB: 10.0, SliceType.MMTC: 40.0})
    assignment = policy.assignment(slices)
    assert policy.getName() == 'static-aware'
    assert assignment[(0, LAT)] == pytest.approx(0.1)
    assert assignment[(1, LAT)] == pytest.approx(1.0)
    assert assignment[(2, LAT)] == pytest.approx(4.0)


@pytest.mark.parametrize('kwargs', [{}, {'delta': 0.0}, {'perType': {SliceType.URLLC: -1.0}}])
def test_static_policy_validation(kwargs):
    with pytest.raises(ConfigurationError):
        StaticPolicy(**kwargs)


def test_static_aware_needs_every_type(slices):
    with pytest.raises(ConfigurationError):
        StaticPolicy(perType={SliceType.URLLC: 1.0}).assignment(slices)


def test_static_decision_log(slices, config, topology):
    log = runStatic(StaticPolicy(delta=2.0), slices, config, topology).getDecisions()
    assert set(log['provenance']) == {'STATIC'}
    assert len(log) == 9


# Probabilistic per-hop sampling

def test_sampling_probability():
    assert samplingProbability(4, None) == pytest.approx(0.25)
    assert samplingProbability(5, 2 * SAMPLE_BITS) == pytest.approx(0.4)
    assert samplingProbability(2, 10 * SAMPLE_BITS) == 1.0


def test_budget_below_one_sample_is_rejected():
    with pytest.raises(ConfigurationError):
        PintLikeScheme(budgetBits=SAMPLE_BITS - 1)
    with pytest.raises(ConfigurationError):
        PintLikeScheme(probability=0.0)


def test_reconstruction_sums_the_latest_value_per_hop():
    table = HopSampleTable()
    table.update(0, 1, 0, 1.0, 10)
    table.update(0, 1, 2, 3.0, 20)
    table.update(0, 1, 0, 1.5, 30)
    assert table.reconstruct(0, 1, 3) == pytest.approx(4.5)
    assert table.get(0, 1, 0) == (1.5, 30)
    assert table.get(0, 1, 1) is None


def singleSwitch():
    topology = Topology()
    topology.addSwitch(0, Tier.ACCESS)
    topology.addHostPort(0, 25e9 / 100, 500_000)
    return topology


def test_full_sampling_on_one_hop_is_exact():
    slices = [makeSlice(0, SliceType.URLLC, [PathSpec(1, [0], [0])], users=1, rateMbps=2.0)]
    result = runPintLike(None, slices, SimulationConfig(duration=2.0, epoch=0.5, seed=9), singleSwitch())
    summary = result.getSummary()
    assert summary['bits_per_packet'] == pytest.approx(SAMPLE_BITS)
    assert summary['violation_fraction'] == 0.0
    assert latencyRow(result)['max_error'] == pytest.approx(0.0, abs=1e-9)


def test_anti_correlated_hops_break_sampling_but_not_change_triggering():
    """Per-hop offsets that cancel end to end: stale mixes of hop values spike, accumulated values do not."""
    config = SimulationConfig(scaleFactor=1.0, duration=2.0, epoch=0.5, seed=11,
                              antiCorrelation=AntiCorrelation(sliceId=0, firstHop=0, offsetUs=150.0))
    topology = Topology()
    for switchId, tier in ((0, Tier.ACCESS), (4, Tier.ACCESS), (8, Tier.AGGREGATION)):
        topology.addSwitch(switchId, tier)
    topology.addHostPort(4, 25e9, 5000)
    topology.addLink(0, 8, 25e9, 5000, Tier.ACCESS)
    topology.addLink(8, 4, 25e9, 5000, Tier.ACCESS)
    route = [0, 8, 4], [topology.getPortTowards(0, 8), topology.getPortTowards(8, 4), 0]
    slices = [makeSlice(0, SliceType.URLLC, [PathSpec(1, *route)], users=1, rateMbps=1.0)]

    pint = latencyRow(runPintLike(None, slices, config, topology))
    static = latencyRow(runStatic(StaticPolicy(delta=0.2), slices, config, topology))
    tolerance = slices[0].getTolerance(LAT)
    assert pint['max_error'] > tolerance
    assert pint['violations'] > 0
    assert static['max_error'] < tolerance
    assert static['violations'] == 0


# Per-hop histograms

def test_histogram_binning():
    histogram = HopHistogram(4, 8.0)
    for value in (0.0, 1.99, 2.0, 7.9, 100.0, -1.0):
        histogram.add(value)
    assert histogram.counts.tolist() == [3, 1, 0, 2]
    assert histogram.getMidpoints().tolist() == [1.0, 3.0, 5.0, 7.0]
    histogram.reset()
    assert histogram.getTotal() == 0
    assert histogram.getDistribution().tolist() == [0.0] * 4


def test_point_mass_reads_the_bin_midpoint():
    histogram = HopHistogram(10, 10.0)
    for _ in range(50):
        histogram.add(3.3)
    values, dist = convolvedSupport([histogram])
    assert quantile(values, dist, 0.9) == pytest.approx(3.5)


def test_convolution_matches_enumeration():
    rng = np.random.default_rng(3)
    histograms = []
    for _ in range(3):
        histogram = HopHistogram(5, 5.0)
        histogram.counts[:] = rng.integers(0, 10, 5)
        histogram.counts[0] += 1
        histograms.append(histogram)
    values, dist = convolvedSupport(histograms)
    expected = {}
    for bins in itertools.product(range(5), repeat=3):
        p = np.prod([h.getDistribution()[b] for h, b in zip(histograms, bins)])
        total = sum(h.getMidpoints()[b] for h, b in zip(histograms, bins))
        expected[round(total, 9)] = expected.get(round(total, 9), 0.0) + p
    got = {round(v, 9): p for v, p in zip(values, dist)}
    assert got.keys() == expected.keys()
    for key in expected:
        assert got[key] == pytest.approx(expected[key], abs=1e-12)
    assert convolve([np.array([0.5, 0.5])] * 2).tolist() == [0.25, 0.5, 0.25]


@pytest.mark.parametrize('bins,expected', [(4, 0.9), (10, 0.6)])
def test_finer_bins_shrink_the_p90_error(bins, expected):
    hops = [HopHistogram(bins, 10.0), HopHistogram(bins, 10.0)]
    for _ in range(20):
        hops[0].add(1.3)
        hops[1].add(2.1)
    values, dist = convolvedSupport(hops)
    assert abs(quantile(values, dist, 0.9) - 3.4) == pytest.approx(expected)


def test_too_few_bins():
    with pytest.raises(ConfigurationError):
        SketchLikeScheme(bins=1)
    with pytest.raises(ConfigurationError):
        HopHistogram(4, 0.0)


def test_sketch_run_reports_interval_p90(slices, config, topology):
    result = runSketchLike(10, 250.0, slices, config, topology)
    summary = result.getSummary()
    assert summary['scheme'] == 'sketch-like'
    assert math.isnan(summary['violation_fraction'])
    assert summary['bits_per_packet'] > 0
    assert not math.isnan(summary['p90_error'])
    row = latencyRow(result)
    assert row['p90_intervals'] > 0
