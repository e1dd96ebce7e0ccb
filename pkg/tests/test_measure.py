import math

import numpy as np
import pytest

from pyslicemon.core import MetricKind, SliceType
from pyslicemon.netsim.collector import CollectorView, GroundTruth, Series
from pyslicemon.netsim.measure import MEASURE_COLUMNS, measure, p90Series

LAT = MetricKind.LATENCY


def record(truth, view, sliceId, values, estimates, metric=LAT, stepNs=1000):
    for i, (value, estimate) in enumerate(zip(values, estimates)):
        truth.values.setdefault((sliceId, metric), Series()).append(i * stepNs, value)
        view.estimate(sliceId, 1, metric, i * stepNs, estimate)


def test_exact_reports_never_violate():
    truth, view = GroundTruth(), CollectorView()
    values = [1.0, 2.0, 3.0]
    record(truth, view, 0, values, values)
    table = measure(view, truth, {(0, LAT): 0.5}, {0: SliceType.URLLC})
    assert list(table.columns) == MEASURE_COLUMNS
    assert table.loc[0, 'violation_fraction'] == 0.0
    assert table.loc[0, 'packets'] == 3


def test_constant_offset_beyond_tolerance_always_violates():
    truth, view = GroundTruth(), CollectorView()
    record(truth, view, 0, [10.0] * 5, [12.0] * 5)
    table = measure(view, truth, {(0, LAT): 0.5})
    assert table.loc[0, 'violation_fraction'] == 1.0
    assert table.loc[0, 'max_error'] == pytest.approx(2.0)


def test_matches_a_brute_force_count():
    rng = np.random.default_rng(1)
    values = rng.uniform(0, 10, 1000)
    estimates = values + rng.normal(0, 1, 1000)
    truth, view = GroundTruth(), CollectorView()
    record(truth, view, 3, values, estimates)
    eps = 0.8
    expected = sum(1 for v, e in zip(values, estimates) if abs(e - v) > eps) / 1000
    table = measure(view, truth, {(3, LAT): eps}, {3: SliceType.EMBB})
    assert table.loc[0, 'violation_fraction'] == pytest.approx(expected)
    assert table.loc[0, 'slice_type'] == 'EMBB'


def test_slice_without_packets_is_absent():
    table = measure(CollectorView(), GroundTruth(), {(4, LAT): 0.1})
    assert table.loc[0, 'packets'] == 0
    assert math.isnan(table.loc[0, 'violation_fraction'])


def test_interval_only_view_has_no_per_packet_violations():
    truth, view = GroundTruth(), CollectorView(perPacket=False)
    record(truth, view, 0, [1.0, 2.0], [1.0, 2.0])
    table = measure(view, truth, {(0, LAT): 0.5})
    assert math.isnan(table.loc[0, 'violation_fraction'])


def test_p90_per_interval():
    truth, view = GroundTruth(), CollectorView()
    values = list(range(1, 11)) + list(range(11, 21))
    record(truth, view, 0, values, [v + 1 for v in values], stepNs=100)
    series = p90Series(view, truth, 0, intervalNs=1000)
    assert list(series['interval']) == [0, 1]
    assert series['true_p90'].tolist() == pytest.approx([np.quantile(range(1, 11), 0.9),
                                                        np.quantile(range(11, 21), 0.9)])
    assert series['error'].tolist() == pytest.approx([1.0, 1.0])


def test_p90_from_interval_reports():
    truth, view = GroundTruth(), CollectorView(perPacket=False)
    record(truth, view, 0, [1.0] * 10, [1.0] * 10, stepNs=100)
    view.reportP90(0, 0, 1.5)
    series = p90Series(view, truth, 0, intervalNs=1000)
    assert series['error'].tolist() == pytest.approx([0.5])
