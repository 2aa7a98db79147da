import pytest
from hypothesis import given, strategies as st

from qfunctest.analysis import TYPE1, TYPE2, detect_collisions
from qfunctest.device import DeviceModel, QubitParams
from qfunctest.topology import ChipTopology, Triplet


def path3(f, alpha=-0.33):
    topo = ChipTopology.build(3, [(0, 1), (1, 2)])
    qs = tuple(QubitParams(omega01_ghz=w, alpha_ghz=alpha) for w in f)
    return topo, DeviceModel(qubits=qs)


def test_falcon_hits_exactly_two(falcon):
    topo, dev = falcon
    rep = detect_collisions(dev, topo)
    got = {(c.triplet.members, c.kind): round(c.detuning_mhz, 1) for c in rep.entries}
    assert got == {((24, 25, 22), TYPE1): 7.8, ((2, 3, 5), TYPE2): 0.3}
    for c in rep.entries:
        assert abs(c.detuning_mhz) <= c.threshold_mhz


def test_spread_frequencies_give_nothing():
    topo, dev = path3([4.0, 5.0, 6.0])
    assert detect_collisions(dev, topo).entries == ()


def test_type1_is_directional():
    # omega12(0) = 5.0 - 0.33 = 4.67 collides with omega01(2) = 4.672
    topo, dev = path3([5.0, 5.9, 4.672])
    rep = detect_collisions(dev, topo)
    kinds = {(c.triplet.members, c.kind) for c in rep.entries}
    assert ((0, 1, 2), TYPE1) in kinds
    assert ((2, 1, 0), TYPE1) not in kinds


def test_type2_reported_once_and_looked_up_both_ways():
    # omega02(1) = 2*5.0 - 0.33 = 9.67 = omega01(0) + omega01(2)
    topo, dev = path3([4.835, 5.0, 4.835])
    rep = detect_collisions(dev, topo)
    t2 = [c for c in rep.entries if c.kind == TYPE2]
    assert len(t2) == 1 and t2[0].triplet == Triplet(0, 1, 2)
    assert rep.lookup(Triplet(2, 1, 0)) is not None


def test_missing_alpha_raises():
    topo = ChipTopology.build(2, [(0, 1)])
    dev = DeviceModel(qubits=(QubitParams(omega01_ghz=5.0), QubitParams(omega01_ghz=5.1)))
    with pytest.raises(ValueError):
        detect_collisions(dev, topo)


def test_thresholds_configurable(falcon):
    topo, dev = falcon
    rep = detect_collisions(dev, topo, {"type1": 5.0, "type2": 5.0})
    assert [c.triplet.members for c in rep.entries] == [(2, 3, 5)]


@given(st.lists(st.floats(4.5, 5.5), min_size=3, max_size=3), st.floats(-0.4, -0.2))
def test_type2_symmetric_in_chain_ends(freqs, alpha):
    topo, dev = path3(freqs, alpha)
    topo_r, dev_r = path3(freqs[::-1], alpha)
    hits = {c.kind for c in detect_collisions(dev, topo).entries if c.kind == TYPE2}
    hits_r = {c.kind for c in detect_collisions(dev_r, topo_r).entries if c.kind == TYPE2}
    assert hits == hits_r


@given(st.lists(st.floats(4.5, 5.5), min_size=3, max_size=3))
def test_entries_respect_thresholds(freqs):
    topo, dev = path3(freqs)
    for c in detect_collisions(dev, topo).entries:
        assert 0 <= c.detuning_mhz <= c.threshold_mhz
