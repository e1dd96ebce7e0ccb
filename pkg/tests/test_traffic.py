import numpy as np
import pytest
import simpy

from pyslicemon.core import EventKind, SliceType
from pyslicemon.netsim.events import schedule
from pyslicemon.netsim.traffic import genTraffic, packetRate

from conftest import makeSlice


def urllc(users=5, rateMbps=2.0):
    return makeSlice(0, SliceType.URLLC, [], users=users, rateMbps=rateMbps, packetBytes=(125, 125))


def test_mean_rate():
    s = urllc()
    assert packetRate(s.traffic) == pytest.approx(10000.0)
    arrivals = list(genTraffic(s, seed=1, untilNs=1_000_000_000))
    assert len(arrivals) == pytest.approx(10000, rel=0.03)
    assert all(size == 125 for _, size in arrivals)


def test_scale_divides_the_rate():
    s = urllc()
    assert packetRate(s.traffic, 100.0) == pytest.approx(100.0)


def test_arrivals_are_ordered_and_bounded():
    arrivals = list(genTraffic(urllc(), seed=2, startNs=500, untilNs=10_000_000))
    times = [t for t, _ in arrivals]
    assert times == sorted(times)
    assert times[0] >= 500 and times[-1] < 10_000_000


def test_zero_rate_yields_nothing():
    assert list(genTraffic(urllc(users=0), seed=1, untilNs=10**9)) == []
    assert list(genTraffic(urllc(rateMbps=0.0), seed=1, untilNs=10**9)) == []


def test_same_seed_same_stream():
    a = list(genTraffic(urllc(), seed=3, untilNs=50_000_000))
    b = list(genTraffic(urllc(), seed=3, untilNs=50_000_000))
    c = list(genTraffic(urllc(), seed=4, untilNs=50_000_000))
    assert a == b
    assert a != c


def test_sizes_stay_in_range():
    s = makeSlice(1, SliceType.EMBB, [], users=2, rateMbps=20.0, packetBytes=(1000, 1500))
    sizes = np.array([size for _, size in genTraffic(s, seed=5, untilNs=200_000_000)])
    assert sizes.min() >= 1000 and sizes.max() <= 1500


def test_bursts_only_arrive_in_on_periods():
    s = urllc()
    onNs, offNs = 2_000_000, 2_000_000
    arrivals = list(genTraffic(s, seed=6, untilNs=1_000_000_000, burstOnMs=2.0, burstOffMs=2.0))
    assert all(t % (onNs + offNs) < onNs for t, _ in arrivals)
    assert len(arrivals) == pytest.approx(10000, rel=0.05)


def test_simultaneous_events_resolve_by_kind():
    env = simpy.Environment()
    fired = []
    for kind in (EventKind.PACKET_ARRIVAL, EventKind.NOTIFICATION, EventKind.EPOCH_BOUNDARY,
                 EventKind.PACKET_DEPARTURE, EventKind.EXPORT):
        schedule(env, kind, 10, lambda event: fired.append(event.kind))
    env.run()
    assert fired == [EventKind.EPOCH_BOUNDARY, EventKind.EXPORT, EventKind.NOTIFICATION,
                     EventKind.PACKET_DEPARTURE, EventKind.PACKET_ARRIVAL]


def test_negative_delay_is_rejected():
    with pytest.raises(ValueError):
        schedule(simpy.Environment(), EventKind.EXPORT, -1, lambda event: None)
