"""Circuit execution: clustering, per-cluster evolution, readout and sampling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..analysis.collisions import TYPE1, TYPE2, CollisionReport
from ..circuit import CX, UNITARY_KINDS, X, Circuit
from ..device import DeviceModel
from ..records import CountsRecord
from ..topology import ChipTopology, Triplet
from .lindblad import (ClusterState, SimulationError, build_zz_hamiltonian, collapse_ops,
                       evolve_delay, heating_adjusted_t1)


class ClusterCapError(SimulationError):
    def __init__(self, cluster: Sequence[int], cap: int):
        super().__init__(f"cluster {sorted(cluster)} has {len(cluster)} qubits; cap is {cap}")
        self.cluster = list(cluster)


# --- qubit roles and clustering ----------------------------------------------

def qubit_roles(circuit: Circuit) -> list[str]:
    """'frozen' (no unitary gates), 'classical' (X gates only) or 'quantum'."""
    roles = ["frozen"] * circuit.num_qubits
    for g in circuit.gates:
        if g.kind not in UNITARY_KINDS:
            continue
        for q in g.qubits:
            if g.kind == X:
                if roles[q] == "frozen":
                    roles[q] = "classical"
            else:
                roles[q] = "quantum"
    return roles


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def partition_into_clusters(circuit: Circuit, topo: ChipTopology, device: DeviceModel,
                            coupling_axis: str = "z", merge_all_couplings: bool = False,
                            cap: int | None = None) -> list[list[int]]:
    """Groups of qubits that must share one density matrix.

    Qubits sharing a multi-qubit gate are always joined. A nonzero zz edge
    joins its endpoints unless one of them is an idle |0> spectator or both
    only ever see X gates: in either case every state involved stays
    diagonal in the computational basis and sigma_z sigma_z has no effect
    beyond a phase that the frozen-neighbour term captures. Non-z couplings
    and ``merge_all_couplings`` join every coupled pair.
    """
    roles = qubit_roles(circuit)
    ds = _DisjointSet(circuit.num_qubits)
    for g in circuit.gates:
        if g.kind == CX:
            ds.union(*g.qubits)
    for (i, j), v in device.zz_2pi_mhz.items():
        if v == 0:
            continue
        if merge_all_couplings or coupling_axis != "z":
            ds.union(i, j)
            continue
        if "frozen" in (roles[i], roles[j]):
            continue
        if roles[i] == roles[j] == "classical":
            continue
        ds.union(i, j)
    groups: dict[int, list[int]] = {}
    for q in range(circuit.num_qubits):
        groups.setdefault(ds.find(q), []).append(q)
    clusters = sorted(groups.values(), key=lambda c: c[0])
    cap = device.cluster_cap if cap is None else cap
    for c in clusters:
        if len(c) > cap:
            raise ClusterCapError(c, cap)
    return clusters


# --- exact outcome distributions ----------------------------------------------

@dataclass
class OutcomeDistribution:
    """Independent blocks of measurement probabilities.

    Each block is (qubits, probs) with probs indexed big-endian over the
    block's qubit order.
    """

    num_qubits: int
    blocks: list[tuple[tuple[int, ...], np.ndarray]] = field(default_factory=list)
    trace_drift: float = 0.0

    def _block_of(self, q):
        for k, (qs, _) in enumerate(self.blocks):
            if q in qs:
                return k
        raise KeyError(q)

    def merge(self, qubits: Iterable[int]) -> int:
        """Fuse the blocks holding ``qubits`` into one joint block; return its index."""
        idx = sorted({self._block_of(q) for q in qubits})
        if len(idx) == 1:
            return idx[0]
        qs: tuple[int, ...] = ()
        p = np.ones(1)
        for k in idx:
            bq, bp = self.blocks[k]
            qs += bq
            p = np.kron(p, bp)
        for k in reversed(idx):
            del self.blocks[k]
        self.blocks.append((qs, p))
        return len(self.blocks) - 1

    def zero_probability(self, group: Iterable[int]) -> float:
        """Exact P(all qubits of ``group`` read 0)."""
        group = set(group)
        total = 1.0
        for qs, p in self.blocks:
            inside = [i for i, q in enumerate(qs) if q in group]
            if not inside:
                continue
            t = p.reshape([2] * len(qs))
            idx = tuple(0 if i in inside else slice(None) for i in range(len(qs)))
            total *= float(np.sum(t[idx]))
        return total

    def full(self) -> np.ndarray:
        """Joint distribution indexed by the integer value of the little-endian bitstring."""
        n = self.num_qubits
        if n > 20:
            raise ValueError("full distribution too large")
        t = np.ones([2] * 0)
        order: list[int] = []
        for qs, p in self.blocks:
            t = np.multiply.outer(t, p.reshape([2] * len(qs)))
            order += list(qs)
        # axis for qubit q must land at position n-1-q (q=0 is the rightmost bit)
        perm = [order.index(n - 1 - pos) for pos in range(n)]
        return np.transpose(t, perm).reshape(-1)


def _readout(p: np.ndarray, qubits: Sequence[int], device: DeviceModel) -> np.ndarray:
    k = len(qubits)
    t = p.reshape([2] * k)
    for i, q in enumerate(qubits):
        p10, p01 = device.qubits[q].readout
        if p10 == 0 and p01 == 0:
            continue
        M = np.array([[1 - p10, p01], [p10, 1 - p01]])
        t = np.moveaxis(np.tensordot(M, t, axes=([1], [i])), 0, i)
    return t.reshape(-1)


def _force_ones(p: np.ndarray, positions: Sequence[int], k: int) -> np.ndarray:
    t = p.reshape([2] * k)
    for i in positions:
        s = t.sum(axis=i, keepdims=True)
        t = np.concatenate([np.zeros_like(s), s], axis=i)
    return t.reshape(-1)


def apply_collision_channel(target, triplet: Triplet, p_leak: float, kind: str = TYPE1,
                            rng: np.random.Generator | None = None):
    """Phenomenological leakage of the spectator-neighbour ``a``.

    With probability ``p_leak`` qubit a (type 1) or the pair a, b (type 2)
    reads 1 whatever the later gates did. ``target`` is an
    :class:`OutcomeDistribution` (mixed exactly) or a histogram dict
    (resampled per shot with ``rng``). Returns the same kind of object.
    """
    if not 0 <= p_leak <= 1:
        raise ValueError("p_leak must be a probability")
    forced = [triplet.a] if kind == TYPE1 else [triplet.a, triplet.b]
    if p_leak == 0:
        return target
    if isinstance(target, OutcomeDistribution):
        out = OutcomeDistribution(target.num_qubits, list(target.blocks), target.trace_drift)
        k = out.merge(forced)
        qs, p = out.blocks[k]
        pos = [qs.index(q) for q in forced]
        out.blocks[k] = (qs, (1 - p_leak) * p + p_leak * _force_ones(p, pos, len(qs)))
        return out
    if rng is None:
        raise ValueError("resampling a histogram needs an rng")
    hist: dict[str, int] = {}
    for bits, count in sorted(target.items()):
        leaked = int(rng.binomial(count, p_leak))
        n = len(bits)
        chars = list(bits)
        for q in forced:
            chars[n - 1 - q] = "1"
        hit = "".join(chars)
        for key, c in ((bits, count - leaked), (hit, leaked)):
            if c:
                hist[key] = hist.get(key, 0) + c
    return hist


def _x_parity_before(circuit: Circuit, q: int, t: float, gate_index: int) -> int:
    parity = 0
    for k, g in enumerate(circuit.gates):
        if k >= gate_index:
            break
        if g.kind == X and q in g.qubits and g.at <= t:
            parity ^= 1
    return parity


def collision_events(circuit: Circuit, topo: ChipTopology,
                     collisions: CollisionReport | None) -> list[tuple[Triplet, str]]:
    """Flagged chains triggered by the circuit's CX gates.

    A CX(b, c) fires a flagged chain a-b-c when the spectator neighbour a
    has been put in |1> by X gates only (the collision needs a excited).
    """
    if collisions is None or not collisions.entries:
        return []
    roles = qubit_roles(circuit)
    events = []
    for k, g in enumerate(circuit.gates):
        if g.kind != CX:
            continue
        b, c = g.qubits
        for a in topo.neighbors(b):
            if a == c:
                continue
            hit = collisions.lookup(Triplet(a, b, c))
            if hit is None or roles[a] != "classical":
                continue
            if _x_parity_before(circuit, a, g.at, k):
                events.append((Triplet(a, b, c), hit.kind))
    return events


def _cluster_schedule(circuit: Circuit, cluster: Sequence[int]):
    members = set(cluster)
    items = []
    t_prev = 0.0
    for g in circuit.gates:
        if g.kind not in UNITARY_KINDS or not members.intersection(g.qubits):
            continue
        if not members.issuperset(g.qubits):
            raise SimulationError(f"gate {g} straddles cluster {sorted(cluster)}")
        if g.at > t_prev:
            items.append(("delay", (g.at - t_prev) * 1e-3))
            t_prev = g.at
        items.append(("gate", g))
    end = circuit.end_time
    if end > t_prev:
        items.append(("delay", (end - t_prev) * 1e-3))
    return items


def _x_rates(circuit: Circuit, topo: ChipTopology) -> dict[int, float]:
    if not circuit.x_train or circuit.tau <= 0:
        return {}
    rates: dict[int, float] = {}
    for s, k in circuit.x_train.items():
        for q in topo.neighbors(s):
            rates[q] = rates.get(q, 0.0) + k / circuit.tau
    return rates


def simulate_cluster(circuit: Circuit, cluster: Sequence[int], topo: ChipTopology,
                     device: DeviceModel, roles: Sequence[str] | None = None,
                     coupling_axis: str = "z") -> ClusterState:
    roles = roles or qubit_roles(circuit)
    frozen: dict[int, int] = {}
    if coupling_axis == "z":
        members = set(cluster)
        for q in cluster:
            for f in topo.neighbors(q):
                if f not in members and roles[f] == "frozen" and device.omega_zz(q, f):
                    frozen[f] = +1  # idle spectators sit in |0>
    H_ = build_zz_hamiltonian(device, cluster, frozen, axis=coupling_axis)
    rates = _x_rates(circuit, topo)
    t1_eff = {q: heating_adjusted_t1(device, q, rates[q]) for q in cluster if q in rates}
    ops = collapse_ops(device, cluster, t1_eff)
    omegas = [device.omega_zz(q, f) for q in cluster for f in topo.neighbors(q)]
    state = ClusterState.ground(cluster)
    return evolve_delay(state, _cluster_schedule(circuit, cluster), H_, ops,
                        omega_max=max(omegas, default=0.0))


def outcome_distribution(circuit: Circuit, device: DeviceModel, topo: ChipTopology,
                         collisions: CollisionReport | None = None,
                         coupling_axis: str = "z", merge_all_couplings: bool = False,
                         readout: bool = True) -> OutcomeDistribution:
    """Exact measurement distribution of every qubit, before shot sampling."""
    if device.num_qubits != circuit.num_qubits:
        raise ValueError("device and circuit disagree on qubit count")
    roles = qubit_roles(circuit)
    clusters = partition_into_clusters(circuit, topo, device, coupling_axis,
                                       merge_all_couplings)
    dist = OutcomeDistribution(circuit.num_qubits)
    for cl in clusters:
        st = simulate_cluster(circuit, cl, topo, device, roles, coupling_axis)
        p = np.clip(np.real(np.diag(st.rho)), 0.0, None)
        p = p / p.sum()
        if readout:
            p = _readout(p, cl, device)
        dist.blocks.append((tuple(cl), p))
        dist.trace_drift = max(dist.trace_drift, st.trace_drift)
    for triplet, kind in collision_events(circuit, topo, collisions):
        dist = apply_collision_channel(dist, triplet, device.collision_p_leak, kind)
    return dist


def sample_counts(dist: OutcomeDistribution, shots: int, rng: np.random.Generator) -> dict[str, int]:
    """Draw ``shots`` joint outcomes; blocks are independent so each is drawn on its own."""
    n = dist.num_qubits
    chars = np.zeros((shots, n), dtype=np.uint8)  # column j is bitstring position j
    for qs, p in dist.blocks:
        p = p / p.sum()
        idx = rng.choice(len(p), size=shots, p=p)
        k = len(qs)
        for i, q in enumerate(qs):
            chars[:, n - 1 - q] = (idx >> (k - 1 - i)) & 1
    rows, counts = np.unique(chars, axis=0, return_counts=True)
    table = np.array(["0", "1"])
    return {"".join(table[r]): int(c) for r, c in zip(rows, counts)}


def run_circuit(circuit: Circuit, device: DeviceModel, topo: ChipTopology, shots: int,
                seed: int, collisions: CollisionReport | None = None,
                coupling_axis: str = "z") -> CountsRecord:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = outcome_distribution(circuit, device, topo, collisions, coupling_axis)
    rng = np.random.default_rng(seed)
    hist = sample_counts(dist, shots, rng)
    return CountsRecord(circuit.pattern_id, circuit.tau, shots, int(seed), hist, circuit.variant)


def exact_group_fidelity(circuit: Circuit, device: DeviceModel, topo: ChipTopology,
                         group: Iterable[int], **kwargs) -> float:
    return outcome_distribution(circuit, device, topo, **kwargs).zero_probability(group)


__all__ = [
    "ClusterCapError", "CountsRecord", "OutcomeDistribution", "apply_collision_channel",
    "collision_events", "exact_group_fidelity", "outcome_distribution",
    "partition_into_clusters", "qubit_roles", "run_circuit", "sample_counts",
    "simulate_cluster",
]
