"""Frequency-collision screening over qubit chains."""
from __future__ import annotations

from dataclasses import dataclass

from ..device import DeviceModel
from ..topology import ChipTopology, Triplet, chains

TYPE1 = "T1"  # omega12(a) ~ omega01(c): the CR drive on b excites a to |2>
TYPE2 = "T2"  # omega02(b) - omega01(a) ~ omega01(c): joint a:1->0, b:0->2 transition

DEFAULT_THRESHOLDS_MHZ = {"type1": 10.0, "type2": 5.0}


@dataclass(frozen=True)
class Collision:
    triplet: Triplet
    kind: str
    detuning_mhz: float  # absolute
    threshold_mhz: float


@dataclass(frozen=True)
class CollisionReport:
    entries: tuple[Collision, ...]

    def triplets(self) -> list[Triplet]:
        return [c.triplet for c in self.entries]

    def lookup(self, t: Triplet) -> Collision | None:
        """Collision matching a cover triplet.

        Type-1 hits are orientation specific; type-2 hits match either
        traversal of the chain.
        """
        for c in self.entries:
            if c.triplet == t:
                return c
            if c.kind == TYPE2 and c.triplet == Triplet(t.c, t.b, t.a):
                return c
        return None

    def to_rows(self) -> list[dict]:
        return [{"a": c.triplet.a, "b": c.triplet.b, "c": c.triplet.c, "type": c.kind,
                 "detuning_mhz": round(c.detuning_mhz, 6), "threshold_mhz": c.threshold_mhz}
                for c in self.entries]


def detect_collisions(device: DeviceModel, topo: ChipTopology,
                      thresholds: dict[str, float] | None = None) -> CollisionReport:
    th = dict(DEFAULT_THRESHOLDS_MHZ)
    th.update(thresholds or {})
    for q, p in enumerate(device.qubits):
        if p.omega01_ghz is None or p.alpha_ghz is None:
            raise ValueError(f"qubit {q} lacks omega01/alpha calibration")
    qp = device.qubits
    hits = []
    for t in chains(topo):
        a, b, c = qp[t.a], qp[t.b], qp[t.c]
        d1 = abs(a.omega12_ghz - c.omega01_ghz) * 1e3
        if d1 <= th["type1"]:
            hits.append(Collision(t, TYPE1, d1, th["type1"]))
        # symmetric in a <-> c, so report each chain once
        if t.a < t.c:
            d2 = abs(b.omega02_ghz - a.omega01_ghz - c.omega01_ghz) * 1e3
            if d2 <= th["type2"]:
                hits.append(Collision(t, TYPE2, d2, th["type2"]))
    return CollisionReport(tuple(hits))
