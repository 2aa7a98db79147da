"""Measurement histograms as persisted and replayed."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CountsRecord:
    pattern_id: str
    tau: float  # us
    shots: int
    seed: int
    histogram: dict[str, int]
    variant: str = ""

    def __post_init__(self):
        total = sum(self.histogram.values())
        if total != self.shots:
            raise ValueError(f"record {self.pattern_id}@{self.tau}: histogram sums to "
                             f"{total}, expected {self.shots} shots")
        widths = {len(b) for b in self.histogram}
        if len(widths) > 1:
            raise ValueError(f"record {self.pattern_id}@{self.tau}: mixed bitstring lengths")
        if any(c < 0 for c in self.histogram.values()):
            raise ValueError("negative count")

    @property
    def num_qubits(self) -> int:
        return len(next(iter(self.histogram))) if self.histogram else 0
