"""Density-matrix dynamics for small qubit clusters.

Conventions: time in us, angular frequencies in rad/us. A cluster is an
ordered qubit list; position 0 is the most significant factor of the
tensor product (``kron(q0, q1, ...)``). Matrices are vectorized row-major,
so ``vec(A rho B) = kron(A, B.T) @ vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from ..circuit import CX, H, X, Gate
from ..device import DeviceModel

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
PAULI = {"x": SX, "y": SY, "z": SZ}

GATE_MATRICES = {
    X: SX,
    H: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    CX: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}

STEPS_PER_TIMESCALE = 200
DENSE_PROPAGATOR_MAX_DIM = 256  # Liouville-space dimension (4 qubits)
TRACE_TOLERANCE = 1e-9


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CollapseOp:
    qubit: int
    kind: str  # "relaxation" | "dephasing"
    rate: float  # 1/us

    def __post_init__(self):
        if self.kind not in ("relaxation", "dephasing"):
            raise ValueError(f"unknown collapse kind {self.kind!r}")
        if not self.rate >= 0:
            raise ValueError("collapse rate must be >= 0")

    def matrix(self) -> np.ndarray:
        a = LOWER if self.kind == "relaxation" else SZ
        return math.sqrt(self.rate) * a


@dataclass
class ClusterState:
    qubits: tuple[int, ...]
    rho: np.ndarray
    trace_drift: float = 0.0  # largest |tr(rho) - 1| seen before renormalization

    @classmethod
    def ground(cls, qubits: Sequence[int]) -> "ClusterState":
        d = 2 ** len(qubits)
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return cls(tuple(qubits), rho)

    def check(self, tol_herm=1e-10, tol_trace=1e-9, tol_psd=1e-9) -> None:
        r = self.rho
        if np.max(np.abs(r - r.conj().T)) >= tol_herm:
            raise SimulationError("density matrix lost Hermiticity")
        if abs(np.trace(r).real - 1) > tol_trace:
            raise SimulationError(f"trace drifted to {np.trace(r).real}")
        if np.linalg.eigvalsh((r + r.conj().T) / 2).min() < -tol_psd:
            raise SimulationError("density matrix is not positive semidefinite")


def embed(op: np.ndarray, positions: Sequence[int], k: int) -> np.ndarray:
    """Lift an operator on ``positions`` (in order) of a k-qubit register."""
    m = len(positions)
    if op.shape != (2 ** m, 2 ** m):
        raise ValueError("operator size does not match positions")
    if m == 1:
        p = positions[0]
        return np.kron(np.kron(np.eye(2 ** p), op), np.eye(2 ** (k - p - 1)))
    # general case: permute the target positions to the front
    rest = [q for q in range(k) if q not in positions]
    order = list(positions) + rest
    full = np.kron(op, np.eye(2 ** (k - m)))
    t = full.reshape([2] * (2 * k))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [k + i for i in inv])
    return t.reshape(2 ** k, 2 ** k)


def build_zz_hamiltonian(device: DeviceModel, cluster: Sequence[int],
                         frozen_neighbors: Mapping[int, int] | None = None,
                         axis: str = "z") -> np.ndarray:
    """Coupling Hamiltonian H/hbar (rad/us) of a cluster.

    Couplings inside the cluster contribute Omega sigma_a sigma_a. A frozen
    neighbour sitting in a sigma_z eigenstate (eigenvalue +-1) contributes the
    single-qubit term +-Omega sigma_z on the cluster qubit it touches.
    """
    k = len(cluster)
    if len(set(cluster)) != k:
        raise ValueError("cluster qubits must be distinct")
    pos = {q: i for i, q in enumerate(cluster)}
    s = PAULI[axis]
    H_ = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for (i, j), _ in device.zz_2pi_mhz.items():
        om = device.omega_zz(i, j)
        if om == 0:
            continue
        if i in pos and j in pos:
            H_ += om * embed(np.kron(s, s), [pos[i], pos[j]], k)
    for f, eig in (frozen_neighbors or {}).items():
        if f in pos:
            raise ValueError(f"frozen neighbour {f} is inside the cluster")
        for q in cluster:
            om = device.omega_zz(q, f)
            if om:
                H_ += om * eig * embed(SZ, [pos[q]], k)
    return H_


def collapse_ops(device: DeviceModel, cluster: Sequence[int],
                 t1_override: Mapping[int, float] | None = None) -> list[CollapseOp]:
    """Relaxation (rate 1/T1) and dephasing (rate 1/(2 T2)) per qubit.

    With the sigma_z dephasing operator this rate makes coherences decay as
    exp(-t/T2).
    """
    ops = []
    for q in cluster:
        p = device.qubits[q]
        t1 = (t1_override or {}).get(q, p.t1_us)
        if not math.isinf(t1):
            ops.append(CollapseOp(q, "relaxation", 1.0 / t1))
        if not math.isinf(p.t2_us):
            ops.append(CollapseOp(q, "dephasing", 1.0 / (2.0 * p.t2_us)))
    return ops


def _op_matrices(ops: Iterable[CollapseOp], qubits: Sequence[int]) -> list[np.ndarray]:
    pos = {q: i for i, q in enumerate(qubits)}
    k = len(qubits)
    out = []
    for op in ops:
        if op.qubit not in pos:
            raise ValueError(f"collapse operator on qubit {op.qubit} outside the cluster")
        if op.rate:
            out.append(embed(op.matrix(), [pos[op.qubit]], k))
    return out


def lindblad_rhs(rho: np.ndarray, H_: np.ndarray, ops: Iterable[CollapseOp],
                 qubits: Sequence[int] | None = None) -> np.ndarray:
    """drho/dt = -i[H, rho] + sum_n (C rho C^+ - {C^+ C, rho}/2)."""
    if rho.shape != H_.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, H {H_.shape}")
    if qubits is None:
        qubits = list(range(int(round(math.log2(rho.shape[0])))))
    if 2 ** len(qubits) != rho.shape[0]:
        raise ValueError("qubit list does not match matrix dimension")
    out = -1j * (H_ @ rho - rho @ H_)
    for C in _op_matrices(ops, qubits):
        Cd = C.conj().T
        CdC = Cd @ C
        out += C @ rho @ Cd - 0.5 * (CdC @ rho + rho @ CdC)
    return out


def liouvillian(H_: np.ndarray, ops: Iterable[CollapseOp], qubits: Sequence[int]) -> sp.csr_matrix:
    """Sparse superoperator of :func:`lindblad_rhs` acting on row-major vec(rho)."""
    d = H_.shape[0]
    Id = sp.identity(d, dtype=complex, format="csr")
    Hs = sp.csr_matrix(H_)
    L = -1j * (sp.kron(Hs, Id) - sp.kron(Id, Hs.T))
    for C in _op_matrices(ops, qubits):
        Cs = sp.csr_matrix(C)
        CdC = (Cs.conj().T @ Cs).tocsr()
        L = L + sp.kron(Cs, Cs.conj()) - 0.5 * (sp.kron(CdC, Id) + sp.kron(Id, CdC.T))
    return sp.csr_matrix(L)


def apply_gate(rho: np.ndarray, gate: Gate, qubits: Sequence[int]) -> np.ndarray:
    """U rho U^+ for an X, H or CX gate on a cluster ordered as ``qubits``."""
    if gate.kind not in GATE_MATRICES:
        raise ValueError(f"{gate.kind} is not a unitary gate")
    pos = {q: i for i, q in enumerate(qubits)}
    missing = [q for q in gate.qubits if q not in pos]
    if missing:
        raise ValueError(f"gate qubit(s) {missing} outside cluster {list(qubits)}")
    U = embed(GATE_MATRICES[gate.kind], [pos[q] for q in gate.qubits], len(qubits))
    return U @ rho @ U.conj().T


def step_timescale(ops: Iterable[CollapseOp], omega_max: float) -> float:
    """min(T1, T2, pi/(4 max Omega)) for the step rule; inf when nothing evolves."""
    scale = math.inf
    for op in ops:
        if op.rate > 0:
            t = 1.0 / op.rate if op.kind == "relaxation" else 1.0 / (2.0 * op.rate)
            scale = min(scale, t)
    if omega_max > 0:
        scale = min(scale, math.pi / (4.0 * omega_max))
    return scale


class _Propagator:
    """Fixed-step classical RK4 for drho/dt = L rho over one delay segment.

    For a linear right-hand side one RK4 step is the matrix polynomial
    1 + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24. Small clusters precompute that
    step matrix and raise it to the step count; larger ones step with sparse
    products.
    """

    def __init__(self, L: sp.csr_matrix, timescale: float):
        self.L = L
        self.timescale = timescale
        self.dense = L.shape[0] <= DENSE_PROPAGATOR_MAX_DIM
        self._cache: dict[float, object] = {}

    def steps(self, duration: float) -> tuple[int, float]:
        h_max = min(self.timescale, duration) / STEPS_PER_TIMESCALE
        if not (h_max > 0 and math.isfinite(h_max)):
            raise SimulationError(f"step underflow (h = {h_max}) for segment {duration}")
        n = max(1, math.ceil(duration / h_max - 1e-9))
        return n, duration / n

    def apply(self, vec: np.ndarray, duration: float) -> np.ndarray:
        if duration <= 0:
            return vec
        n, h = self.steps(duration)
        if self.dense:
            P = self._cache.get(duration)
            if P is None:
                A = h * self.L.toarray()
                A2 = A @ A
                step = np.eye(A.shape[0]) + A + A2 / 2 + A2 @ A / 6 + A2 @ A2 / 24
                P = np.linalg.matrix_power(step, n)
                self._cache[duration] = P
            return P @ vec
        L = self.L
        for _ in range(n):
            k1 = L @ vec
            k2 = L @ (vec + 0.5 * h * k1)
            k3 = L @ (vec + 0.5 * h * k2)
            k4 = L @ (vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return vec


def evolve_delay(state: ClusterState, schedule: Sequence[tuple[str, object]],
                 H_: np.ndarray, ops: Sequence[CollapseOp],
                 omega_max: float | None = None) -> ClusterState:
    """Run a schedule of ``("delay", us)`` and ``("gate", Gate)`` items.

    Delays are integrated with fixed-step RK4,
    h = min(T1, T2, pi/(4 max Omega), segment) / 200; gates act as instantaneous
    unitaries. The trace is renormalized only when it drifts by more than 1e-9.
    """
    qubits = state.qubits
    d = state.rho.shape[0]
    if H_.shape != (d, d):
        raise ValueError("Hamiltonian does not match the cluster dimension")
    if omega_max is None:
        omega_max = float(np.max(np.abs(H_))) if H_.size else 0.0
    if not all(math.isfinite(op.rate) for op in ops) or not np.all(np.isfinite(H_)):
        raise SimulationError("non-finite model parameters")
    prop = _Propagator(liouvillian(H_, ops, qubits), step_timescale(ops, omega_max))
    rho = state.rho.copy()
    drift = state.trace_drift
    for kind, item in schedule:
        if kind == "gate":
            rho = apply_gate(rho, item, qubits)
        elif kind == "delay":
            vec = prop.apply(rho.reshape(-1), float(item))
            rho = vec.reshape(d, d)
            tr = np.trace(rho).real
            if not math.isfinite(tr):
                raise SimulationError("integration produced non-finite values")
            drift = max(drift, abs(tr - 1.0))
            if abs(tr - 1.0) > TRACE_TOLERANCE:
                rho = rho / tr
        else:
            raise ValueError(f"unknown schedule item {kind!r}")
    return ClusterState(qubits, rho, drift)


def heating_adjusted_t1(device: DeviceModel, qubit: int, x_rate: float) -> float:
    """T1 / (1 + kappa * x_rate), with x_rate in X gates per us on neighbours."""
    if x_rate < 0:
        raise ValueError("x_rate must be >= 0")
    return device.qubits[qubit].t1_us / (1.0 + device.heating_kappa * x_rate)


def closed_form_plus_fidelity(t2: float, couplings: Sequence[tuple[float, str]], tau: float,
                              echoed: bool = True) -> float:
    """Echoed |+> fidelity of a qubit with zz-coupled neighbours.

    ``couplings`` lists (Omega in rad/us, mode) with mode "superposition" for
    an echoed neighbour in |+> and "frozen-zero" for an idle neighbour in |0>.
    The echo flips both partners of a superposition pair (sigma_z sigma_z is
    unchanged) but refocuses the static shift from a frozen neighbour:
    F = (1 + exp(-tau/T2) * prod cos(2 Omega tau)) / 2.
    """
    if not echoed:
        raise ValueError("closed form is derived for echoed patterns only")
    prod = 1.0
    for omega, mode in couplings:
        if mode == "superposition":
            prod *= math.cos(2.0 * omega * tau)
        elif mode != "frozen-zero":
            raise ValueError(f"unknown neighbour mode {mode!r}")
    return 0.5 * (1.0 + math.exp(-tau / t2) * prod)
