"""Command line entry point.

Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..analysis import FailureMap
from ..device import load_device
from ..simulator import SimulationError
from ..topology import ParseError, TopologyError, topology_from_dict
from .config import default_tau_grid, load_config
from .counts import parse_counts
from .render import collision_table, emit_failure_map
from .suite import (ReplayMismatchError, analyze, collision_report, dumps_analysis, ghz_study,
                    plan_suite, run_suite)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_range(text: str) -> list[int]:
    """``2..8`` or ``2,3,5``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


@dataclass(frozen=True)
class _RecordPlan:
    """Stand-in plan for counts analysed without a suite config."""

    config: object
    groups: tuple
    spectators: frozenset = frozenset()


@dataclass(frozen=True)
class _Id:
    id: str
    variant: str


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = run_suite(cfg)
    print(f"wrote {len(manifest.records)} records and {len(manifest.files)} files to {cfg.output}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    topo, device = load_device(Path(args.device).read_text())
    records = parse_counts(Path(args.counts).read_text())
    if args.config:
        cfg = load_config(args.config)
        report = collision_report(topo, device, cfg.thresholds) if cfg.collisions else None
        plans = plan_suite(cfg, topo, device, report)
    else:
        cfg = None
        report = collision_report(topo, device)
        order: dict[str, str] = {}
        for r in records:
            order.setdefault(r.pattern_id, r.variant)
        singles = tuple(frozenset([q]) for q in range(topo.num_qubits))
        plans = [_RecordPlan(_Id(pid, v), singles) for pid, v in order.items()]
    for r in records:
        if r.num_qubits != topo.num_qubits:
            raise ParseError(f"record {r.pattern_id}@{r.tau} has {r.num_qubits} bits, "
                             f"device has {topo.num_qubits} qubits")
    _emit(dumps_analysis(analyze(records, plans, cfg, topo, device, report)), args.out)
    return EXIT_OK


def cmd_map(args) -> int:
    doc = json.loads(Path(args.input).read_text())
    maps = doc.get("delta_maps") or []
    if not maps:
        raise ParseError("analysis file holds no delta maps")
    if args.label:
        maps = [m for m in maps if m.get("label") == args.label]
        if not maps:
            raise ParseError(f"no map labelled {args.label!r}")
    topo = topology_from_dict(doc["topology"])
    if args.format == "svg" and len(maps) > 1 and not args.label:
        raise UsageError("several maps in file; pick one with --label for svg output")
    text = "".join(emit_failure_map(FailureMap.from_dict(m), topo, args.format, args.limit)
                   for m in maps)
    _emit(text, args.out)
    return EXIT_OK


def cmd_collisions(args) -> int:
    topo, device = load_device(Path(args.device).read_text())
    report = collision_report(topo, device, {"type1_mhz": args.type1, "type2_mhz": args.type2})
    if report is None:
        raise ParseError("device file lacks qubit frequencies or anharmonicities")
    _emit(collision_table(report.to_rows()), args.out)
    return EXIT_OK


def cmd_ghz(args) -> int:
    topo, device = load_device(Path(args.device).read_text())
    taus = args.taus or default_tau_grid()
    stats = ghz_study(topo, device, args.lengths, args.samples, args.seed, taus, args.shots)
    lines = ["length\ttau_us\tmean_f\tstderr\tn"]
    for st in stats:
        for t, m, e in zip(st.taus, st.mean, st.stderr):
            lines.append(f"{st.length}\t{t:g}\t{m:.6f}\t{e:.6f}\t{st.n}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qfunctest", description="Pattern-based functional tests for qubit memories.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="build, execute and analyse a pattern suite")
    r.add_argument("--config", required=True)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="analyse a counts file")
    a.add_argument("--counts", required=True)
    a.add_argument("--device", required=True)
    a.add_argument("--config", help="suite config naming groups, fits and maps")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("map", help="render a failure map from analysis.json")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--format", choices=("svg", "csv", "text"), default="text")
    m.add_argument("--label")
    m.add_argument("--limit", type=float, default=0.2, help="colour scale half-width")
    m.add_argument("--out")
    m.set_defaults(func=cmd_map)

    c = sub.add_parser("collisions", help="screen a device file for frequency collisions")
    c.add_argument("--device", required=True)
    c.add_argument("--type1", type=float, default=10.0, help="threshold in MHz")
    c.add_argument("--type2", type=float, default=5.0, help="threshold in MHz")
    c.add_argument("--out")
    c.set_defaults(func=cmd_collisions)

    g = sub.add_parser("ghz-study", help="GHZ fidelity versus chain length")
    g.add_argument("--device", required=True)
    g.add_argument("--lengths", type=parse_range, default=parse_range("2..8"))
    g.add_argument("--samples", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--taus", type=parse_floats)
    g.add_argument("--shots", type=int, default=0, help="0 = exact probabilities")
    g.add_argument("--out")
    g.set_defaults(func=cmd_ghz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, TopologyError, ReplayMismatchError, FileNotFoundError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SimulationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
