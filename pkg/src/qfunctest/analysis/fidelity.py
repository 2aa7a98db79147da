"""Fidelity estimates from measurement histograms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..records import CountsRecord


@dataclass(frozen=True)
class FidelityPoint:
    tau: float
    f: float
    stderr: float


@dataclass(frozen=True)
class FidelitySeries:
    group: frozenset[int]
    points: tuple[FidelityPoint, ...]
    shots: int

    def __post_init__(self):
        taus = [p.tau for p in self.points]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("series taus must be strictly increasing")
        for p in self.points:
            if not 0.0 <= p.f <= 1.0:
                raise ValueError(f"fidelity {p.f} outside [0, 1]")

    @property
    def taus(self) -> list[float]:
        return [p.tau for p in self.points]

    @property
    def values(self) -> list[float]:
        return [p.f for p in self.points]

    def at(self, tau: float) -> FidelityPoint:
        for p in self.points:
            if p.tau == tau:
                return p
        raise KeyError(f"tau {tau} not in series for group {sorted(self.group)}")

    @classmethod
    def from_values(cls, group: Iterable[int], taus: Sequence[float], values: Sequence[float],
                    shots: int) -> "FidelitySeries":
        pts = tuple(FidelityPoint(float(t), float(f), binomial_stderr(f, shots))
                    for t, f in zip(taus, values))
        return cls(frozenset(group), pts, shots)


def binomial_stderr(f: float, shots: int) -> float:
    return math.sqrt(max(f * (1.0 - f), 0.0) / shots)


def estimate_fidelity(record: CountsRecord, group: Iterable[int]) -> tuple[float, float]:
    """Fraction of shots where every qubit of ``group`` read 0.

    Bitstrings are little-endian: qubit q is character ``len - 1 - q``.
    """
    group = sorted(set(group))
    if not group:
        raise ValueError("empty qubit group")
    n = record.num_qubits
    bad = [q for q in group if not 0 <= q < n]
    if bad:
        raise ValueError(f"qubits {bad} are not in the {n}-qubit record")
    pos = [n - 1 - q for q in group]
    hits = sum(c for bits, c in record.histogram.items() if all(bits[i] == "0" for i in pos))
    f = hits / record.shots
    return f, binomial_stderr(f, record.shots)


def series_from_records(records: Iterable[CountsRecord], group: Iterable[int]) -> FidelitySeries:
    """One group's fidelity over the records of a single pattern, sorted by tau."""
    recs = sorted(records, key=lambda r: r.tau)
    if not recs:
        raise ValueError("no records")
    shots = {r.shots for r in recs}
    pts = []
    for r in recs:
        f, e = estimate_fidelity(r, group)
        pts.append(FidelityPoint(r.tau, f, e))
    return FidelitySeries(frozenset(group), tuple(pts), min(shots))
