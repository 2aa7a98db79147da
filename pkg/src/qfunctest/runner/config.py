"""Suite configuration (JSON file <-> dataclasses)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..circuit import PatternSpec, Variant
from ..topology import ParseError

DEFAULT_SHOTS = 2500


def default_tau_grid() -> list[float]:
    """20 log-spaced delays over [1, 150] us, rounded to ns."""
    return [round(float(t), 3) for t in np.geomspace(1.0, 150.0, 20)]


@dataclass(frozen=True)
class PatternConfig:
    id: str
    variant: str
    side: str = "A"
    n_x_gates: int = 0
    bell_kind: str = "phi+"
    bell_layout: str = "dense"
    with_cnot: bool = True
    chain_length: int = 2
    chains: tuple[tuple[int, ...], ...] = ()  # GHZ_CHAIN placements; empty = sampled

    def __post_init__(self):
        self.spec()  # validates variant and options

    def spec(self) -> PatternSpec:
        return PatternSpec(Variant(self.variant), self.side, self.n_x_gates, self.bell_kind,
                           self.bell_layout, self.with_cnot, self.chain_length)


@dataclass(frozen=True)
class FitConfig:
    pattern: str
    model: str = "exponential"  # or "zz-oscillation"
    qubits: tuple[int, ...] = ()  # empty = every single-qubit group
    n_neighbors: int | None = None  # None = topology degree


@dataclass(frozen=True)
class DeltaMapConfig:
    a: str
    b: str
    tau: float
    threshold: float = 0.05
    label: str = ""


@dataclass(frozen=True)
class ProductConfig:
    a: str  # checkerboard side A
    b: str  # checkerboard side B
    pairs_from: str  # BELL pattern supplying the pairs
    tau: float


@dataclass(frozen=True)
class RenderConfig:
    delta_limit: float = 0.2  # colour scale spans [-limit, +limit]
    formats: tuple[str, ...] = ("text",)

    def __post_init__(self):
        bad = sorted(set(self.formats) - {"text", "csv", "svg"})
        if bad:
            raise ValueError(f"unknown map formats {bad}")
        if self.delta_limit <= 0:
            raise ValueError("delta_limit must be positive")


@dataclass(frozen=True)
class SuiteConfig:
    device: str
    patterns: tuple[PatternConfig, ...]
    tau_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_tau_grid()))
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    backend: str = "simulator"  # or "replay"
    replay_path: str | None = None
    output: str = "out"
    cover: str = "greedy"  # triplet cover: "greedy" or "collisions"
    thresholds: dict[str, float] = field(
        default_factory=lambda: {"type1_mhz": 10.0, "type2_mhz": 5.0})
    device_overrides: dict[str, float] = field(default_factory=dict)
    fits: tuple[FitConfig, ...] = ()
    delta_maps: tuple[DeltaMapConfig, ...] = ()
    products: tuple[ProductConfig, ...] = ()
    collisions: bool = True
    render: RenderConfig = field(default_factory=RenderConfig)

    def __post_init__(self):
        taus = list(self.tau_grid)
        if not taus:
            raise ValueError("tau grid is empty")
        if any(b <= a for a, b in zip(taus, taus[1:])) or taus[0] < 0:
            raise ValueError("tau grid must be non-negative and strictly increasing")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.backend not in ("simulator", "replay"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "replay" and not self.replay_path:
            raise ValueError("replay backend needs replay_path")
        if self.cover not in ("greedy", "collisions"):
            raise ValueError(f"cover must be greedy or collisions, got {self.cover!r}")
        ids = [p.id for p in self.patterns]
        if len(set(ids)) != len(ids):
            raise ValueError("pattern ids must be unique")
        if any(not i or any(ch.isspace() for ch in i) for i in ids):
            raise ValueError("pattern ids must be non-empty and contain no whitespace")
        refs = [f.pattern for f in self.fits]
        refs += [x for d in self.delta_maps for x in (d.a, d.b)]
        refs += [x for p in self.products for x in (p.a, p.b, p.pairs_from)]
        missing = sorted(set(refs) - set(ids))
        if missing:
            raise ValueError(f"analyses refer to unknown patterns {missing}")

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, doc: dict, where: str):
    if not isinstance(doc, dict):
        raise ParseError("must be an object", field=where)
    known = set(cls.__dataclass_fields__)
    extra = sorted(set(doc) - known)
    if extra:
        raise ParseError(f"unknown keys {extra}", field=where)
    try:
        return cls(**doc)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), field=where) from exc


def config_from_dict(doc: dict[str, Any], base_dir: Path | None = None) -> SuiteConfig:
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object")
    doc = dict(doc)
    patterns = []
    for k, p in enumerate(doc.pop("patterns", [])):
        p = dict(p) if isinstance(p, dict) else p
        if isinstance(p, dict) and "chains" in p:
            p["chains"] = tuple(tuple(c) for c in p["chains"])
        patterns.append(_build(PatternConfig, p, f"patterns[{k}]"))
    fits = []
    for k, f in enumerate(doc.pop("fits", [])):
        f = dict(f) if isinstance(f, dict) else f
        if isinstance(f, dict) and "qubits" in f:
            f["qubits"] = tuple(f["qubits"])
        fits.append(_build(FitConfig, f, f"fits[{k}]"))
    maps = [_build(DeltaMapConfig, d, f"delta_maps[{k}]")
            for k, d in enumerate(doc.pop("delta_maps", []))]
    products = [_build(ProductConfig, d, f"products[{k}]")
                for k, d in enumerate(doc.pop("products", []))]
    render = doc.pop("render", {})
    if isinstance(render, dict) and "formats" in render:
        render = {**render, "formats": tuple(render["formats"])}
    render = _build(RenderConfig, render, "render")
    if "tau_grid" in doc:
        doc["tau_grid"] = tuple(float(t) for t in doc["tau_grid"])
    if base_dir is not None:
        for key in ("device", "replay_path", "output"):
            if doc.get(key) and not Path(doc[key]).is_absolute():
                doc[key] = str(base_dir / doc[key])
    doc.update(patterns=tuple(patterns), fits=tuple(fits), delta_maps=tuple(maps),
               products=tuple(products), render=render)
    return _build(SuiteConfig, doc, "config")


def load_config(path: str | Path) -> SuiteConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return config_from_dict(doc, base_dir=path.parent)
