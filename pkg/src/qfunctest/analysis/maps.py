"""Per-qubit fidelity-difference maps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..topology import Triplet
from .fidelity import FidelitySeries


@dataclass(frozen=True)
class FailureMap:
    """Delta F per qubit at one tau; spectators are pinned to zero."""

    tau: float
    delta: dict[int, float]
    threshold: float
    spectators: frozenset[int] = frozenset()
    flags: frozenset[int] = frozenset()
    label: str = ""
    overlay: tuple[Triplet, ...] = field(default=())

    def __post_init__(self):
        for q, d in self.delta.items():
            if abs(d) > 1.0 + 1e-12:
                raise ValueError(f"|delta F| > 1 on qubit {q}")
            if q in self.spectators and d != 0.0:
                raise ValueError(f"spectator {q} must have delta F = 0")

    def flagged_triplets(self, triplets: Iterable[Triplet]) -> list[Triplet]:
        return [t for t in triplets if set(t.members) & self.flags]

    def to_rows(self) -> list[tuple[int, float, bool]]:
        return [(q, self.delta[q], q in self.flags) for q in sorted(self.delta)]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "tau_us": self.tau,
            "threshold": self.threshold,
            "delta": {str(q): d for q, d in sorted(self.delta.items())},
            "spectators": sorted(self.spectators),
            "flags": sorted(self.flags),
            "overlay": [list(t.members) for t in self.overlay],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "FailureMap":
        return cls(
            tau=float(doc["tau_us"]),
            delta={int(q): float(d) for q, d in doc["delta"].items()},
            threshold=float(doc["threshold"]),
            spectators=frozenset(doc.get("spectators", [])),
            flags=frozenset(doc.get("flags", [])),
            label=doc.get("label", ""),
            overlay=tuple(Triplet(*m) for m in doc.get("overlay", [])),
        )


def delta_map(series_a: Mapping[int, FidelitySeries], series_b: Mapping[int, FidelitySeries],
              tau: float, spectators: Iterable[int] = (), threshold: float = 0.05,
              label: str = "", overlay: Sequence[Triplet] = ()) -> FailureMap:
    """Delta F = F_a - F_b per qubit at exactly ``tau`` (no interpolation).

    Qubits present in only one input, and every spectator, get 0.
    """
    spectators = frozenset(spectators)
    delta: dict[int, float] = {}
    for q in sorted(set(series_a) | set(series_b) | spectators):
        if q in spectators or q not in series_a or q not in series_b:
            delta[q] = 0.0
            continue
        try:
            delta[q] = series_a[q].at(tau).f - series_b[q].at(tau).f
        except KeyError as exc:
            raise ValueError(f"qubit {q}: tau {tau} us missing from a series") from exc
    flags = frozenset(q for q, d in delta.items() if abs(d) > threshold)
    return FailureMap(tau, delta, threshold, spectators, flags, label, tuple(overlay))


def product_fidelity(map_a: Mapping[int, FidelitySeries], map_b: Mapping[int, FidelitySeries],
                     pairs: Sequence[tuple[int, int]], tau: float) -> dict[tuple[int, int], float]:
    """Joint fidelity F_A(q1) * F_B(q2) for pairs split across the two checkerboards."""
    out = {}
    for q1, q2 in pairs:
        if q1 in map_a and q2 in map_b:
            fa, fb = map_a[q1], map_b[q2]
        elif q2 in map_a and q1 in map_b:
            fa, fb = map_a[q2], map_b[q1]
        else:
            raise ValueError(f"pair ({q1}, {q2}) is not split across partitions A and B")
        out[(q1, q2)] = fa.at(tau).f * fb.at(tau).f
    return out
