"""Averages over randomly placed GHZ chains."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fidelity import FidelitySeries


@dataclass(frozen=True)
class GhzStats:
    length: int
    taus: tuple[float, ...]
    mean: tuple[float, ...]
    stderr: tuple[float, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one sample")
        if any(not 0.0 <= m <= 1.0 for m in self.mean):
            raise ValueError("mean fidelity outside [0, 1]")

    def to_dict(self) -> dict:
        return {"length": self.length, "n": self.n, "taus_us": list(self.taus),
                "mean": list(self.mean), "stderr": list(self.stderr)}


def ghz_statistics(samples: Sequence[FidelitySeries], length: int | None = None) -> GhzStats:
    """Per-tau sample mean and standard error sigma/sqrt(n) (sigma with ddof=1).

    With one sample there is no spread estimate and the error is reported as 0.
    """
    if not samples:
        raise ValueError("need at least one sample")
    taus = tuple(samples[0].taus)
    for s in samples[1:]:
        if tuple(s.taus) != taus:
            raise ValueError("samples must share one tau grid")
    f = np.array([s.values for s in samples], dtype=float)
    n = len(samples)
    sd = f.std(axis=0, ddof=1) if n > 1 else np.zeros(len(taus))
    if length is None:
        length = len(samples[0].group)
    return GhzStats(length, taus, tuple(f.mean(axis=0).tolist()),
                    tuple((sd / np.sqrt(n)).tolist()), n)
