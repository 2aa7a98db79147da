import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfunctest.analysis import TYPE1, TYPE2
from qfunctest.circuit import H, PatternSpec, Variant, X, Gate, build_pattern
from qfunctest.device import DeviceModel, QubitParams
from qfunctest.records import CountsRecord
from qfunctest.simulator import (ClusterCapError, ClusterState, OutcomeDistribution,
                                 apply_collision_channel, exact_group_fidelity,
                                 outcome_distribution, partition_into_clusters, qubit_roles,
                                 run_circuit, sample_counts)
from qfunctest.simulator.lindblad import (CollapseOp, apply_gate, build_zz_hamiltonian,
                                          closed_form_plus_fidelity, collapse_ops, evolve_delay,
                                          heating_adjusted_t1, lindblad_rhs, liouvillian)
from qfunctest.topology import ChipTopology, Triplet, bipartition, triplet_cover

PAIR = ChipTopology.build(2, [(0, 1)])
LINE3 = ChipTopology.build(3, [(0, 1), (1, 2)])
BLANK1 = PatternSpec(Variant.BLANK_ONE)
BLANK_PLUS = PatternSpec(Variant.BLANK_PLUS_ECHOED)


def single(t1=math.inf, t2=math.inf, readout=(0.0, 0.0)):
    topo = ChipTopology.build(1, [])
    return topo, DeviceModel(qubits=(QubitParams(t1, t2, readout=readout),))


def fidelity(spec, topo, dev, tau, group, partition=None, **kw):
    c = build_pattern(spec, topo, partition, tau)
    return exact_group_fidelity(c, dev, topo, group, **kw)


# --- decay laws -------------------------------------------------------------------

def test_blank_one_relaxation():
    topo, dev = single(t1=92.0)
    assert fidelity(BLANK1, topo, dev, 92.0, [0]) == pytest.approx(math.exp(-1), abs=1e-8)


@given(st.floats(5, 300), st.floats(0, 200))
@settings(max_examples=15)
def test_blank_one_follows_t1(t1, tau):
    topo, dev = single(t1=t1)
    assert fidelity(BLANK1, topo, dev, tau, [0]) == pytest.approx(math.exp(-tau / t1), abs=1e-6)


def test_dephasing_convention():
    topo, dev = single(t2=50.0)
    f = fidelity(BLANK_PLUS, topo, dev, 50.0, [0])
    assert f == pytest.approx(0.5 * (1 + math.exp(-1)), abs=1e-8)


def test_pure_dephasing_leaves_one_untouched():
    topo, dev = single(t2=10.0)
    assert fidelity(BLANK1, topo, dev, 40.0, [0]) == pytest.approx(1.0, abs=1e-12)


def test_two_qubit_oracle():
    om = 0.155
    dev = DeviceModel(qubits=(QubitParams(t2_us=204.0), QubitParams()),
                      zz_2pi_mhz={(0, 1): om})
    for tau in (0.0, 7.3, 33.0, 80.0):
        want = closed_form_plus_fidelity(204.0, [(2 * math.pi * om, "superposition")], tau)
        assert fidelity(BLANK_PLUS, PAIR, dev, tau, [0]) == pytest.approx(want, abs=1e-6)


def test_closed_form_frozen_neighbour_is_refocused():
    assert closed_form_plus_fidelity(100.0, [(3.0, "frozen-zero")], 10.0) == pytest.approx(
        0.5 * (1 + math.exp(-0.1)))
    with pytest.raises(ValueError):
        closed_form_plus_fidelity(100.0, [], 1.0, echoed=False)
    with pytest.raises(ValueError):
        closed_form_plus_fidelity(100.0, [(1.0, "sideways")], 1.0)


def test_frozen_spectator_echo_refocusing():
    dev = DeviceModel(qubits=(QubitParams(t2_us=80.0),) * 3, zz_2pi_mhz={(0, 1): 1.2, (1, 2): 0.7})
    bp = bipartition(LINE3)
    spec = PatternSpec(Variant.CHECKERBOARD_PLUS_ECHOED, side="B")  # target 1, spectators 0, 2
    for tau in (3.0, 17.0, 60.0):
        f = fidelity(spec, LINE3, dev, tau, [1], bp)
        assert f == pytest.approx(0.5 * (1 + math.exp(-tau / 80.0)), abs=1e-7)


def test_zz_invisible_to_one_states():
    base = DeviceModel(qubits=(QubitParams(t1_us=60.0, t2_us=40.0),) * 3)
    coupled = DeviceModel(qubits=base.qubits, zz_2pi_mhz={(0, 1): 1.54, (1, 2): 1.54})
    for tau in (5.0, 50.0):
        c = build_pattern(BLANK1, LINE3, None, tau)
        a = outcome_distribution(c, base, LINE3).full()
        b = outcome_distribution(c, coupled, LINE3, merge_all_couplings=True).full()
        assert np.max(np.abs(a - b)) < 1e-10


def test_xx_coupling_shows_up_in_one_states():
    dev = DeviceModel(qubits=(QubitParams(t1_us=100.0),) * 2, zz_2pi_mhz={(0, 1): 1.54})
    c = build_pattern(BLANK1, PAIR, None, 0.2)
    f = outcome_distribution(c, dev, PAIR, coupling_axis="x").zero_probability([0])
    # xx conserves parity, so |11> rotates into |00> and back
    assert abs(f - math.exp(-0.2 / 100.0)) > 0.05


# --- heating, readout -----------------------------------------------------------

def test_heating_adjusted_t1():
    topo = ChipTopology.build(1, [])
    dev = DeviceModel(qubits=(QubitParams(t1_us=100.0),), heating_kappa=2.0)
    assert heating_adjusted_t1(dev, 0, 0.5) == pytest.approx(50.0)
    with pytest.raises(ValueError):
        heating_adjusted_t1(dev, 0, -1.0)
    del topo


def test_active_spectators_heat_targets():
    qubits = (QubitParams(t1_us=50.0),) * 3
    bp = bipartition(LINE3)
    spec = PatternSpec(Variant.CHECKERBOARD_ONE_ACTIVE, side="B", n_x_gates=10)
    cold = fidelity(spec, LINE3, DeviceModel(qubits=qubits), 20.0, [1], bp)
    hot = fidelity(spec, LINE3, DeviceModel(qubits=qubits, heating_kappa=1.0), 20.0, [1], bp)
    assert cold == pytest.approx(math.exp(-20 / 50), abs=1e-7)
    # two neighbours at 10 X gates / 20 us each: rate 1 per us, T1 halves
    assert hot == pytest.approx(math.exp(-20 / 25), abs=1e-7)


def test_readout_confusion():
    topo, dev = single(readout=(0.03, 0.08))
    assert fidelity(BLANK1, topo, dev, 0.0, [0]) == pytest.approx(0.97)
    topo1, dev1 = single(t1=10.0, readout=(0.03, 0.08))
    f = fidelity(BLANK1, topo1, dev1, 10.0, [0])
    p0 = math.exp(-1)
    assert f == pytest.approx(p0 * 0.97 + (1 - p0) * 0.08, abs=1e-8)


# --- pseudo-identity, roles, clusters ---------------------------------------------

@pytest.mark.parametrize("variant", list(Variant))
def test_noiseless_tau_zero_is_exact(variant, falcon):
    topo, _ = falcon
    dev = DeviceModel.uniform(topo)
    part = {
        Variant.BLANK_ONE: None, Variant.BLANK_PLUS_ECHOED: None,
        Variant.BELL: [(0, 1), (3, 5)], Variant.GHZ_CHAIN: [[12, 13, 14]],
        Variant.TRIPLET_COLLISION: triplet_cover(topo),
    }.get(variant, bipartition(topo))
    spec = PatternSpec(variant, chain_length=3, n_x_gates=2)
    c = build_pattern(spec, topo, part, 0.0)
    r = run_circuit(c, dev, topo, 500, seed=1)
    assert r.histogram == {"0" * 27: 500}


def test_roles():
    bp = bipartition(LINE3)
    c = build_pattern(PatternSpec(Variant.CHECKERBOARD_ONE), LINE3, bp, 1.0)
    assert qubit_roles(c) == ["classical", "frozen", "classical"]
    cp = build_pattern(BLANK_PLUS, LINE3, None, 1.0)
    assert qubit_roles(cp) == ["quantum"] * 3


def test_clusters_follow_roles(falcon):
    topo, dev = falcon
    cb = build_pattern(PatternSpec(Variant.CHECKERBOARD_PLUS_ECHOED), topo, bipartition(topo), 1.0)
    assert all(len(c) == 1 for c in partition_into_clusters(cb, topo, dev))
    blank = build_pattern(BLANK_PLUS, topo, None, 1.0)
    with pytest.raises(ClusterCapError):
        partition_into_clusters(blank, topo, dev)
    one = build_pattern(BLANK1, topo, None, 1.0)
    assert all(len(c) == 1 for c in partition_into_clusters(one, topo, dev))
    with pytest.raises(ClusterCapError):
        partition_into_clusters(one, topo, dev, merge_all_couplings=True)


def test_cx_joins_cluster():
    cover = triplet_cover(LINE3)
    dev = DeviceModel.uniform(LINE3)
    c = build_pattern(PatternSpec(Variant.TRIPLET_COLLISION), LINE3, cover, 1.0)
    t = cover.triplets[0]
    clusters = partition_into_clusters(c, LINE3, dev)
    assert sorted([t.b, t.c]) in clusters


# --- master-equation invariants ------------------------------------------------

@st.composite
def small_systems(draw):
    k = draw(st.integers(1, 3))
    qubits = tuple(QubitParams(draw(st.floats(5, 200)), draw(st.floats(5, 200)))
                   for _ in range(k))
    topo = ChipTopology.build(k, [(i, i + 1) for i in range(k - 1)])
    zz = {e: draw(st.floats(0, 1.5)) for e in topo.sorted_edges()}
    return topo, DeviceModel(qubits=qubits, zz_2pi_mhz=zz)


@given(small_systems(), st.floats(0.1, 30), st.sampled_from(["z", "x", "y"]))
@settings(max_examples=20, deadline=None)
def test_density_matrix_stays_physical(system, tau, axis):
    topo, dev = system
    cluster = list(range(topo.num_qubits))
    rho = ClusterState.ground(cluster).rho
    for q in cluster:
        rho = apply_gate(rho, Gate(H, (q,)), cluster)
    ham = build_zz_hamiltonian(dev, cluster, axis=axis)
    st_ = evolve_delay(ClusterState(tuple(cluster), rho), [("delay", tau)], ham,
                       collapse_ops(dev, cluster))
    st_.check()
    assert st_.trace_drift < 1e-6


def test_rhs_matches_liouvillian():
    rng = np.random.default_rng(3)
    dev = DeviceModel(qubits=(QubitParams(30.0, 20.0), QubitParams(50.0, 70.0)),
                      zz_2pi_mhz={(0, 1): 0.4})
    ham = build_zz_hamiltonian(dev, [0, 1])
    ops = collapse_ops(dev, [0, 1])
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    lhs = lindblad_rhs(rho, ham, ops, [0, 1]).reshape(-1)
    rhs = liouvillian(ham, ops, [0, 1]) @ rho.reshape(-1)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_collapse_op_rates():
    ops = collapse_ops(DeviceModel(qubits=(QubitParams(10.0, 40.0),)), [0])
    assert [(o.kind, o.rate) for o in ops] == [("relaxation", 0.1), ("dephasing", 1 / 80)]
    with pytest.raises(ValueError):
        CollapseOp(0, "relaxation", -1.0)


def test_frozen_neighbour_term():
    dev = DeviceModel(qubits=(QubitParams(),) * 2, zz_2pi_mhz={(0, 1): 0.5})
    h = build_zz_hamiltonian(dev, [0], frozen_neighbors={1: 1})
    assert np.allclose(np.diag(h), [math.pi, -math.pi])
    with pytest.raises(ValueError):
        build_zz_hamiltonian(dev, [0, 1], frozen_neighbors={1: 1})


# --- outcomes, sampling, collisions ----------------------------------------------

def test_sampling_is_seeded_and_complete():
    topo, dev = single(t1=30.0)
    c = build_pattern(BLANK1, topo, None, 30.0)
    r1 = run_circuit(c, dev, topo, 1000, seed=5)
    r2 = run_circuit(c, dev, topo, 1000, seed=5)
    assert r1 == r2 and sum(r1.histogram.values()) == 1000
    assert r1.histogram != run_circuit(c, dev, topo, 1000, seed=6).histogram


def test_sample_counts_little_endian():
    dist = OutcomeDistribution(3, [((0,), np.array([0.0, 1.0])), ((1, 2), np.array([1, 0, 0, 0.0]))])
    hist = sample_counts(dist, 10, np.random.default_rng(0))
    assert hist == {"001": 10}


def test_collision_channel_exact_and_sampled():
    dist = OutcomeDistribution(3, [((0,), np.array([1.0, 0.0])), ((1,), np.array([1.0, 0.0])),
                                   ((2,), np.array([1.0, 0.0]))])
    t = Triplet(0, 1, 2)
    one = apply_collision_channel(dist, t, 0.25, TYPE1)
    assert one.zero_probability([0]) == pytest.approx(0.75)
    assert one.zero_probability([1]) == pytest.approx(1.0)
    two = apply_collision_channel(dist, t, 0.25, TYPE2)
    assert two.zero_probability([0, 1]) == pytest.approx(0.75)
    assert two.zero_probability([1]) == pytest.approx(0.75)
    hist = apply_collision_channel({"000": 1000}, t, 0.25, TYPE2, rng=np.random.default_rng(1))
    assert set(hist) == {"000", "011"} and sum(hist.values()) == 1000
    with pytest.raises(ValueError):
        apply_collision_channel({"000": 10}, t, 0.5)
    assert apply_collision_channel(dist, t, 0.0) is dist


def test_collision_channel_fires_only_on_flagged_cx(falcon):
    topo, dev = falcon
    from qfunctest.analysis import detect_collisions
    rep = detect_collisions(dev, topo)
    dev = DeviceModel(qubits=tuple(QubitParams() for _ in range(27)), collision_p_leak=0.4)
    cover = triplet_cover(topo, priority=rep.triplets())
    with_cx = build_pattern(PatternSpec(Variant.TRIPLET_COLLISION), topo, cover, 1.0)
    idle = build_pattern(PatternSpec(Variant.TRIPLET_COLLISION, with_cnot=False), topo, cover, 1.0)
    d_cx = outcome_distribution(with_cx, dev, topo, collisions=rep)
    d_idle = outcome_distribution(idle, dev, topo, collisions=rep)
    for q in range(27):
        want = 0.6 if q in (24, 2, 3) else 1.0
        assert d_cx.zero_probability([q]) == pytest.approx(want)
        assert d_idle.zero_probability([q]) == pytest.approx(1.0)


def test_counts_record_validation():
    with pytest.raises(ValueError, match="sums"):
        CountsRecord("p", 1.0, 10, 0, {"0": 9})
    with pytest.raises(ValueError, match="mixed"):
        CountsRecord("p", 1.0, 2, 0, {"0": 1, "10": 1})
    assert CountsRecord("p", 1.0, 2, 0, {"01": 2}).num_qubits == 2


def test_x_gates_flip_classical_qubits():
    topo, dev = single()
    c = build_pattern(BLANK1, topo, None, 0.0)
    assert [g.kind for g in c.unitary_gates()] == [X, X]
    assert exact_group_fidelity(c, dev, topo, [0]) == pytest.approx(1.0)
