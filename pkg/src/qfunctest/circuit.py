"""Timed gate-level circuits and the pattern constructors.

Every pattern follows the pseudo-identity template: prepare with U, idle for
tau, undo with U^dagger, measure everything. Gates are point events at their
``at`` time (ns); only DELAY carries a duration. Idle evolution fills every
gap between events, so the physical idle window of a pattern is exactly tau.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .device import DEFAULT_GATE_DURATIONS_NS
from .topology import Bipartition, ChipTopology, TripletCover

X, H, CX, DELAY, MEASURE = "X", "H", "CX", "DELAY", "MEASURE"
GATE_KINDS = (X, H, CX, DELAY, MEASURE)
UNITARY_KINDS = (X, H, CX)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    at: float = 0.0  # ns
    duration: float = 0.0  # ns, DELAY only

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        n = 2 if self.kind == CX else 1
        if len(self.qubits) != n:
            raise CircuitError(f"{self.kind} takes {n} qubit(s), got {self.qubits}")
        if self.kind == CX and self.qubits[0] == self.qubits[1]:
            raise CircuitError("CX needs two distinct qubits")
        if self.kind == DELAY and self.duration < 0:
            raise CircuitError("negative delay")
        if self.kind != DELAY and self.duration != 0:
            raise CircuitError(f"{self.kind} gates are instantaneous")

    def retimed(self, at: float) -> "Gate":
        return Gate(self.kind, self.qubits, at, self.duration)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    tau: float  # us
    target_groups: tuple[frozenset[int], ...]
    spectators: frozenset[int] = frozenset()
    pattern_id: str = ""
    variant: str = ""
    # spectator X-train lengths, read by the heating model
    x_train: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[int] = set()
        for g in self.target_groups:
            if not g:
                raise CircuitError("empty target group")
            if seen & g:
                raise CircuitError("target groups overlap")
            seen |= g
        if self.spectators & seen:
            raise CircuitError("spectator listed in a target group")
        _check_schedule(self.num_qubits, self.gates)

    @property
    def end_time(self) -> float:
        return max((g.at + g.duration for g in self.gates), default=0.0)

    def gates_on(self, q: int) -> list[Gate]:
        return [g for g in self.gates if q in g.qubits]

    def unitary_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.kind in UNITARY_KINDS]

    def measured(self) -> list[int]:
        return sorted({g.qubits[0] for g in self.gates if g.kind == MEASURE})


def _check_schedule(num_qubits: int, gates: Sequence[Gate]) -> None:
    per_qubit: dict[int, list[Gate]] = defaultdict(list)
    last_at = -float("inf")
    for g in gates:
        if g.at < last_at:
            raise CircuitError("gates are not in schedule order")
        last_at = g.at
        for q in g.qubits:
            if not 0 <= q < num_qubits:
                raise CircuitError(f"qubit {q} out of range")
            per_qubit[q].append(g)
    eps = 1e-9
    for q, gs in per_qubit.items():
        busy_until = -float("inf")
        measured = False
        for g in gs:
            if measured:
                raise CircuitError(f"gate after MEASURE on qubit {q}")
            if g.at < busy_until - eps:
                raise CircuitError(f"overlapping gates on qubit {q} at {g.at} ns")
            busy_until = max(busy_until, g.at + g.duration)
            measured = g.kind == MEASURE


class Variant(str, enum.Enum):
    BLANK_ONE = "BLANK_ONE"
    BLANK_PLUS_ECHOED = "BLANK_PLUS_ECHOED"
    CHECKERBOARD_ONE = "CHECKERBOARD_ONE"
    CHECKERBOARD_PLUS_ECHOED = "CHECKERBOARD_PLUS_ECHOED"
    CHECKERBOARD_ONE_ACTIVE = "CHECKERBOARD_ONE_ACTIVE"
    BELL = "BELL"
    TRIPLET_COLLISION = "TRIPLET_COLLISION"
    GHZ_CHAIN = "GHZ_CHAIN"


ECHOED = {Variant.BLANK_PLUS_ECHOED, Variant.CHECKERBOARD_PLUS_ECHOED, Variant.BELL,
          Variant.GHZ_CHAIN}
CHECKERBOARDS = {Variant.CHECKERBOARD_ONE, Variant.CHECKERBOARD_PLUS_ECHOED,
                 Variant.CHECKERBOARD_ONE_ACTIVE}


@dataclass(frozen=True)
class PatternSpec:
    variant: Variant
    side: str = "A"
    n_x_gates: int = 0
    bell_kind: str = "phi+"
    bell_layout: str = "dense"
    with_cnot: bool = True
    chain_length: int = 2

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.n_x_gates % 2 or self.n_x_gates < 0:
            raise CircuitError(f"n_x_gates must be even and >= 0, got {self.n_x_gates}")
        if self.chain_length < 2:
            raise CircuitError("chain_length must be >= 2")
        if self.side.upper() not in ("A", "B"):
            raise CircuitError(f"side must be A or B, got {self.side!r}")
        if self.bell_kind not in ("phi+", "phi-"):
            raise CircuitError(f"bell_kind must be phi+ or phi-, got {self.bell_kind!r}")
        if self.bell_layout not in ("dense", "spaced"):
            raise CircuitError(f"bell_layout must be dense or spaced, got {self.bell_layout!r}")

    @property
    def echo(self) -> bool:
        return self.variant in ECHOED


def invert(prep: Sequence[Gate]) -> list[Gate]:
    """Inverse of a gate list built from self-inverse gates."""
    for g in prep:
        if g.kind not in UNITARY_KINDS:
            raise CircuitError(f"cannot invert {g.kind}")
    return list(reversed(prep))


class _Schedule:
    def __init__(self):
        self.gates: list[Gate] = []

    def point(self, kind, qubits, at):
        self.gates.append(Gate(kind, tuple(qubits), at))

    def delay(self, q, start, stop):
        if stop > start:
            self.gates.append(Gate(DELAY, (q,), start, stop - start))

    def idle(self, qubits, start, stop, echo_at=None):
        """Delay on each qubit, split by an echo X when requested."""
        for q in qubits:
            if echo_at is None:
                self.delay(q, start, stop)
            else:
                self.delay(q, start, echo_at)
                self.point(X, (q,), echo_at)
                self.delay(q, echo_at, stop)

    def block(self, gates, at):
        for g in gates:
            self.gates.append(g.retimed(at))

    def finish(self, num_qubits, end):
        for q in range(num_qubits):
            self.point(MEASURE, (q,), end)
        # stable sort keeps same-instant gates in insertion order
        order = sorted(range(len(self.gates)), key=lambda k: self.gates[k].at)
        return tuple(self.gates[k] for k in order)


def _bell_prep(pair, kind):
    q1, q2 = pair
    gates = [Gate(X, (q1,))] if kind == "phi-" else []
    return gates + [Gate(H, (q1,)), Gate(CX, (q1, q2))]


def _ghz_prep(chain):
    return [Gate(H, (chain[0],))] + [Gate(CX, (u, v)) for u, v in zip(chain, chain[1:])]


def _check_paths(topo, paths, length=None):
    used: set[int] = set()
    for p in paths:
        p = list(p)
        if length is not None and len(p) != length:
            raise CircuitError(f"path {p} has length {len(p)}, expected {length}")
        if len(set(p)) != len(p):
            raise CircuitError(f"path {p} repeats a qubit")
        for u, v in zip(p, p[1:]):
            if not topo.has_edge(u, v):
                raise CircuitError(f"path {p}: ({u}, {v}) is not an edge")
        if used & set(p):
            raise CircuitError(f"path {p} overlaps another path")
        used |= set(p)
    return used


def build_pattern(spec: PatternSpec, topo: ChipTopology, partition=None, tau: float = 0.0,
                  gate_durations: Mapping[str, float] | None = None,
                  pattern_id: str = "") -> Circuit:
    """Compile one pattern at idle time ``tau`` (us).

    ``partition`` is a Bipartition for checkerboards, a TripletCover for the
    collision pattern, a list of qubit pairs for BELL, a list of chains for
    GHZ_CHAIN, and None for blank patterns.
    """
    if tau < 0:
        raise CircuitError("tau must be >= 0")
    durations = dict(DEFAULT_GATE_DURATIONS_NS)
    durations.update(gate_durations or {})
    v = spec.variant
    n = topo.num_qubits
    T = tau * 1e3
    mid = T / 2 if spec.echo else None
    s = _Schedule()
    everyone = list(range(n))
    x_train: dict[int, int] = {}

    if v in (Variant.BLANK_ONE, Variant.BLANK_PLUS_ECHOED):
        if partition is not None:
            raise CircuitError(f"{v.value} takes no partition input")
        targets, spectators = everyone, []
    elif v in CHECKERBOARDS:
        if not isinstance(partition, Bipartition):
            raise CircuitError(f"{v.value} needs a Bipartition")
        t, sp = partition.side(spec.side)
        targets, spectators = sorted(t), sorted(sp)
    elif v is Variant.BELL:
        pairs = _as_paths(partition, v)
        used = _check_paths(topo, pairs, length=2)
        if spec.bell_layout == "spaced":
            owner = {q: k for k, p in enumerate(pairs) for q in p}
            for i, j in topo.edges:
                if i in owner and j in owner and owner[i] != owner[j]:
                    raise CircuitError(f"spaced layout violated: pairs touch at ({i}, {j})")
        targets, spectators = None, sorted(set(everyone) - used)
    elif v is Variant.GHZ_CHAIN:
        chains_ = _as_paths(partition, v)
        used = _check_paths(topo, chains_, length=spec.chain_length)
        targets, spectators = None, sorted(set(everyone) - used)
    elif v is Variant.TRIPLET_COLLISION:
        if not isinstance(partition, TripletCover):
            raise CircuitError(f"{v.value} needs a TripletCover")
        targets, spectators = None, sorted(partition.idle)
    else:  # pragma: no cover - enum is exhaustive
        raise CircuitError(f"unknown variant {v}")

    if v in (Variant.BLANK_ONE, Variant.CHECKERBOARD_ONE, Variant.CHECKERBOARD_ONE_ACTIVE):
        groups = [frozenset([q]) for q in targets]
        for q in targets:
            s.point(X, (q,), 0.0)
        s.idle(targets, 0.0, T)
        for q in targets:
            s.point(X, (q,), T)
        end = T
        if v is Variant.CHECKERBOARD_ONE_ACTIVE:
            k = spec.n_x_gates
            times = [(i + 0.5) * T / k for i in range(k)] if k else []
            for q in spectators:
                prev = 0.0
                for t in times:
                    s.delay(q, prev, t)
                    s.point(X, (q,), t)
                    prev = t
                s.delay(q, prev, T)
                if k:
                    x_train[q] = k
        else:
            s.idle(spectators, 0.0, T)
    elif v in (Variant.BLANK_PLUS_ECHOED, Variant.CHECKERBOARD_PLUS_ECHOED):
        groups = [frozenset([q]) for q in targets]
        for q in targets:
            s.point(H, (q,), 0.0)
        s.idle(targets, 0.0, T, echo_at=mid)
        for q in targets:
            s.point(H, (q,), T)
        s.idle(spectators, 0.0, T)
        end = T
    elif v in (Variant.BELL, Variant.GHZ_CHAIN):
        paths = pairs if v is Variant.BELL else chains_
        groups = [frozenset(p) for p in paths]
        for p in paths:
            prep = _bell_prep(p, spec.bell_kind) if v is Variant.BELL else _ghz_prep(p)
            s.block(prep, 0.0)
            s.idle(p, 0.0, T, echo_at=mid)
            s.block(invert(prep), T)
        s.idle(spectators, 0.0, T)
        end = T
    else:  # TRIPLET_COLLISION
        cx = durations[CX]
        end = cx + T
        groups = []
        for t in partition.triplets:
            groups += [frozenset([t.a]), frozenset([t.b]), frozenset([t.c])]
            s.point(X, (t.a,), 0.0)
            s.delay(t.a, 0.0, end)
            s.point(X, (t.a,), end)
            if spec.with_cnot:
                s.point(CX, (t.b, t.c), 0.0)
                s.idle((t.b, t.c), cx, end)
            else:
                s.idle((t.b, t.c), 0.0, cx)
                s.idle((t.b, t.c), cx, end)
        s.idle(spectators, 0.0, end)

    return Circuit(
        num_qubits=n,
        gates=s.finish(n, end),
        tau=tau,
        target_groups=tuple(groups),
        spectators=frozenset(spectators),
        pattern_id=pattern_id,
        variant=v.value,
        x_train=x_train,
    )


def _as_paths(partition, v) -> list[tuple[int, ...]]:
    if partition is None or isinstance(partition, (Bipartition, TripletCover)):
        raise CircuitError(f"{v.value} needs a list of qubit paths")
    return [tuple(int(q) for q in p) for p in partition]


# --- text serialization ---------------------------------------------------

def dumps(c: Circuit) -> str:
    lines = [
        f"# pattern {c.pattern_id or '-'}",
        f"# variant {c.variant or '-'}",
        f"# num_qubits {c.num_qubits}",
        f"# tau_us {c.tau!r}",
        "# groups " + ";".join(",".join(map(str, sorted(g))) for g in c.target_groups),
        "# spectators " + ",".join(map(str, sorted(c.spectators))),
        "# x_train " + ",".join(f"{q}:{k}" for q, k in sorted(c.x_train.items())),
    ]
    for g in c.gates:
        row = [repr(float(g.at)), g.kind, *map(str, g.qubits)]
        if g.kind == DELAY:
            row.append(repr(float(g.duration)))
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    header: dict[str, str] = {}
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                header[key] = value.strip()
                continue
            tok = line.split()
            at, kind = float(tok[0]), tok[1]
            if kind == DELAY:
                gates.append(Gate(kind, (int(tok[2]),), at, float(tok[3])))
            else:
                gates.append(Gate(kind, tuple(int(t) for t in tok[2:]), at))
        except (IndexError, ValueError) as exc:
            raise CircuitError(f"line {lineno}: cannot parse {raw!r} ({exc})") from exc

    def ints(s):
        return [int(t) for t in s.split(",") if t]

    groups = tuple(frozenset(ints(g)) for g in header.get("groups", "").split(";") if g)
    x_train = {int(q): int(k) for q, k in
               (item.split(":") for item in header.get("x_train", "").split(",") if item)}
    pid = header.get("pattern", "-")
    variant = header.get("variant", "-")
    return Circuit(
        num_qubits=int(header["num_qubits"]),
        gates=tuple(gates),
        tau=float(header["tau_us"]),
        target_groups=groups,
        spectators=frozenset(ints(header.get("spectators", ""))),
        pattern_id="" if pid == "-" else pid,
        variant="" if variant == "-" else variant,
        x_train=x_train,
    )

