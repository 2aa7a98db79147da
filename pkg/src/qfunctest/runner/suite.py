"""Suite execution: build circuits over the tau grid, run or replay, analyse, persist."""
from __future__ import annotations

import hashlib
import json
import math
import time
import zlib
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .. import __version__
from ..analysis import (CollisionReport, FailureMap, FidelitySeries, GhzStats, delta_map,
                        detect_collisions, fit_exponential, fit_zz_oscillation, ghz_statistics,
                        product_fidelity, series_from_records)
from ..circuit import Circuit, PatternSpec, Variant, build_pattern, dumps
from ..device import DeviceModel, load_device
from ..records import CountsRecord
from ..simulator import exact_group_fidelity, run_circuit
from ..topology import (ChipTopology, ParseError, bipartition, pair_cover, random_chains,
                        triplet_cover)
from .config import PatternConfig, SuiteConfig
from .counts import dumps_counts, ingest_replay
from .render import collision_table, emit_failure_map, fit_table


class ReplayMismatchError(LookupError):
    pass


def derive_seed(seed: int, pattern_id: str, tau_index: int) -> int:
    """Per-(pattern, tau) seed, independent of execution order."""
    ss = np.random.SeedSequence([seed, zlib.crc32(pattern_id.encode()), tau_index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def sha256(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    config: dict
    tool_version: str
    files: dict[str, str] = field(default_factory=dict)  # relative path -> sha256
    records: list[dict] = field(default_factory=list)
    started: str = ""
    finished: str = ""
    elapsed_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps({
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "elapsed_s": self.elapsed_s,
            "config": self.config,
            "files": self.files,
            "records": self.records,
        }, indent=1, sort_keys=True)


# --- setup ----------------------------------------------------------------------

def load_suite_device(cfg: SuiteConfig) -> tuple[ChipTopology, DeviceModel]:
    topo, device = load_device(Path(cfg.device).read_text())
    if cfg.device_overrides:
        allowed = {"collision_p_leak", "heating_kappa", "cluster_cap"}
        bad = sorted(set(cfg.device_overrides) - allowed)
        if bad:
            raise ParseError(f"cannot override {bad}", field="device_overrides")
        device = replace(device, **cfg.device_overrides)
    return topo, device


def collision_report(topo: ChipTopology, device: DeviceModel,
                     thresholds: Mapping[str, float] | None = None) -> CollisionReport | None:
    """Detector output, or None when the device file carries no frequencies."""
    if any(q.omega01_ghz is None or q.alpha_ghz is None for q in device.qubits):
        return None
    th = None
    if thresholds:
        th = {"type1": thresholds.get("type1_mhz", 10.0),
              "type2": thresholds.get("type2_mhz", 5.0)}
    return detect_collisions(device, topo, th)


def resolve_partition(pc: PatternConfig, topo: ChipTopology, cover: str,
                      report: CollisionReport | None, seed: int):
    v = Variant(pc.variant)
    if v in (Variant.BLANK_ONE, Variant.BLANK_PLUS_ECHOED):
        return None
    if v in (Variant.CHECKERBOARD_ONE, Variant.CHECKERBOARD_PLUS_ECHOED,
             Variant.CHECKERBOARD_ONE_ACTIVE):
        return bipartition(topo)
    if v is Variant.BELL:
        return [list(p) for p in pair_cover(topo, spaced=pc.bell_layout == "spaced")]
    if v is Variant.GHZ_CHAIN:
        if pc.chains:
            return [list(c) for c in pc.chains]
        return random_chains(topo, pc.chain_length, 1, seed)
    priority = report.triplets() if (cover == "collisions" and report) else ()
    return triplet_cover(topo, priority=priority)


@dataclass(frozen=True)
class PatternPlan:
    config: PatternConfig
    spec: PatternSpec
    partition: object
    circuits: tuple[Circuit, ...]

    @property
    def groups(self) -> tuple[frozenset[int], ...]:
        return self.circuits[0].target_groups

    @property
    def spectators(self) -> frozenset[int]:
        return self.circuits[0].spectators


def plan_suite(cfg: SuiteConfig, topo: ChipTopology, device: DeviceModel,
               report: CollisionReport | None) -> list[PatternPlan]:
    plans = []
    for pc in cfg.patterns:
        spec = pc.spec()
        part = resolve_partition(pc, topo, cfg.cover, report, cfg.seed)
        circuits = tuple(
            build_pattern(spec, topo, part, tau, device.gate_durations_ns, pattern_id=pc.id)
            for tau in cfg.tau_grid)
        plans.append(PatternPlan(pc, spec, part, circuits))
    return plans


# --- analysis (shared by simulator and replay paths) ------------------------------

def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _clean(x.item())
    return x


def _per_qubit(series: Mapping[frozenset, FidelitySeries]) -> dict[int, FidelitySeries]:
    out = {}
    for g, s in series.items():
        if len(g) == 1:
            out[next(iter(g))] = s
    return out


def analyze(records: Sequence[CountsRecord], plans: Sequence[PatternPlan], cfg: SuiteConfig | None,
            topo: ChipTopology, device: DeviceModel,
            report: CollisionReport | None) -> dict:
    """Fidelity series, fits, maps and the collision table for one set of records."""
    by_pattern: dict[str, list[CountsRecord]] = {}
    for r in records:
        by_pattern.setdefault(r.pattern_id, []).append(r)
    series: dict[str, dict[frozenset, FidelitySeries]] = {}
    doc_series = []
    for plan in plans:
        pid = plan.config.id
        recs = by_pattern.get(pid, [])
        series[pid] = {}
        for g in plan.groups:
            s = series_from_records(recs, g)
            series[pid][g] = s
            doc_series.append({"pattern": pid, "variant": plan.config.variant,
                               "group": sorted(g), "shots": s.shots,
                               "points": [[p.tau, p.f, p.stderr] for p in s.points]})
    doc = {"device": device.name, "topology": topo.to_dict(), "series": doc_series,
           "fits": [], "delta_maps": [], "products": [],
           "collisions": report.to_rows() if report is not None else None}
    if cfg is None:
        return _clean(doc)
    plan_of = {p.config.id: p for p in plans}

    for fc in cfg.fits:
        groups = [g for g in plan_of[fc.pattern].groups if len(g) == 1]
        if fc.qubits:
            wanted = {frozenset([q]) for q in fc.qubits}
            groups = [g for g in groups if g in wanted]
        for g in groups:
            s = series[fc.pattern][g]
            if fc.model == "exponential":
                fr = fit_exponential(s)
            elif fc.model == "zz-oscillation":
                (q,) = g
                n = fc.n_neighbors if fc.n_neighbors is not None else len(topo.neighbors(q))
                fr = fit_zz_oscillation(s, n, seed=cfg.seed)
            else:
                raise ParseError(f"unknown fit model {fc.model!r}", field="fits")
            doc["fits"].append({"pattern": fc.pattern, "group": sorted(g), "model": fr.model,
                                "params": fr.params, "stderr": fr.stderr,
                                "residual_rms": fr.residual_rms, "converged": fr.converged,
                                "identifiable": fr.identifiable,
                                "n_starts_used": fr.n_starts_used})

    for dm in cfg.delta_maps:
        pa, pb = plan_of[dm.a], plan_of[dm.b]
        overlay = report.triplets() if report is not None else ()
        fmap = delta_map(_per_qubit(series[dm.a]), _per_qubit(series[dm.b]), dm.tau,
                         spectators=pa.spectators | pb.spectators, threshold=dm.threshold,
                         label=dm.label or f"{dm.a}-{dm.b}", overlay=overlay)
        entry = fmap.to_dict()
        covers = [p.partition for p in (pa, pb)
                  if p.spec.variant is Variant.TRIPLET_COLLISION]
        if covers:
            entry["flagged_triplets"] = [list(t.members)
                                         for t in fmap.flagged_triplets(covers[0].triplets)]
        doc["delta_maps"].append(entry)

    for pr in cfg.products:
        pairs = [tuple(p) for p in plan_of[pr.pairs_from].partition]
        prod = product_fidelity(_per_qubit(series[pr.a]), _per_qubit(series[pr.b]), pairs, pr.tau)
        rows = []
        for pair, fprod in prod.items():
            f_ent = series[pr.pairs_from][frozenset(pair)].at(pr.tau).f
            rows.append({"pair": list(pair), "product": fprod, "entangled": f_ent,
                         "delta": fprod - f_ent})
        doc["products"].append({"a": pr.a, "b": pr.b, "pairs_from": pr.pairs_from,
                                "tau_us": pr.tau, "pairs": rows})
    return _clean(doc)


def dumps_analysis(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# --- execution --------------------------------------------------------------------

def execute(plans: Sequence[PatternPlan], cfg: SuiteConfig, topo: ChipTopology,
            device: DeviceModel, report: CollisionReport | None) -> list[CountsRecord]:
    if cfg.backend == "replay":
        index = ingest_replay(cfg.replay_path)
        out = []
        for plan in plans:
            for c in plan.circuits:
                r = index.get((plan.config.id, c.tau))
                if r is None:
                    raise ReplayMismatchError(
                        f"no replay record for pattern {plan.config.id} at tau {c.tau}")
                if r.num_qubits != topo.num_qubits:
                    raise ReplayMismatchError(
                        f"record {plan.config.id}@{c.tau} has {r.num_qubits} bits, "
                        f"device has {topo.num_qubits} qubits")
                out.append(r)
        return out
    leak = report if (report is not None and device.collision_p_leak > 0) else None
    out = []
    for plan in plans:
        for k, c in enumerate(plan.circuits):
            seed = derive_seed(cfg.seed, plan.config.id, k)
            out.append(run_circuit(c, device, topo, cfg.shots, seed, collisions=leak))
    return out


class _Collector:
    """Single writer for every output file; records checksums as it goes."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict[str, str] = {}

    def write(self, rel: str, text: str) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.files[rel] = sha256(text)


def run_suite(cfg: SuiteConfig) -> RunManifest:
    t0 = time.perf_counter()
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    topo, device = load_suite_device(cfg)
    report = collision_report(topo, device, cfg.thresholds) if cfg.collisions else None
    plans = plan_suite(cfg, topo, device, report)
    records = execute(plans, cfg, topo, device, report)

    out = _Collector(Path(cfg.output))
    manifest = RunManifest(config=_clean(cfg.to_dict()), tool_version=__version__)
    counts_text = dumps_counts(records)
    out.write("counts.txt", counts_text)
    for r, line in zip(records, counts_text.splitlines()):
        manifest.records.append({"pattern": r.pattern_id, "tau_us": r.tau, "seed": r.seed,
                                 "sha256": sha256(line)})
    for plan in plans:
        out.write(f"circuits/{plan.config.id}.txt", "\n".join(dumps(c) for c in plan.circuits))

    doc = analyze(records, plans, cfg, topo, device, report)
    out.write("analysis.json", dumps_analysis(doc))
    if doc["fits"]:
        out.write("fits.tsv", fit_table(doc["fits"]))
    if doc["collisions"]:
        out.write("collisions.tsv", collision_table(doc["collisions"]))
    for entry in doc["delta_maps"]:
        fmap = FailureMap.from_dict(entry)
        for fmt in cfg.render.formats:
            if fmt == "svg" and not topo.coords:
                continue
            out.write(f"maps/{fmap.label}.{fmt}",
                      emit_failure_map(fmap, topo, fmt, limit=cfg.render.delta_limit))

    manifest.files = dict(sorted(out.files.items()))
    manifest.started = started
    manifest.finished = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest.elapsed_s = round(time.perf_counter() - t0, 3)
    (Path(cfg.output) / "manifest.json").write_text(manifest.to_json())
    return manifest


# --- GHZ size study ------------------------------------------------------------------

def ghz_study(topo: ChipTopology, device: DeviceModel, lengths: Sequence[int], samples: int,
              seed: int, taus: Sequence[float], shots: int = 0) -> list[GhzStats]:
    """Mean GHZ fidelity over ``samples`` random chains per length.

    ``shots=0`` uses exact probabilities; otherwise counts are sampled.
    """
    out = []
    spec_cache: dict[int, PatternSpec] = {}
    for n in lengths:
        spec = spec_cache.setdefault(n, PatternSpec(Variant.GHZ_CHAIN, chain_length=n))
        per_sample = []
        for k, chain in enumerate(random_chains(topo, n, samples, seed + n)):
            values = []
            for i, tau in enumerate(taus):
                c = build_pattern(spec, topo, [chain], tau, device.gate_durations_ns,
                                  pattern_id=f"ghz{n}_{k}")
                if shots:
                    r = run_circuit(c, device, topo, shots, derive_seed(seed, c.pattern_id, i))
                    values.append(series_from_records([r], chain).points[0].f)
                else:
                    values.append(min(max(exact_group_fidelity(c, device, topo, chain), 0.0), 1.0))
            per_sample.append(FidelitySeries.from_values(chain, taus, values, max(shots, 1)))
        out.append(ghz_statistics(per_sample, n))
    return out
