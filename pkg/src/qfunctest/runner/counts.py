"""Line-oriented counts files.

One record per line::

    <pattern_id> <variant> <tau_us> <shots> <seed> <bits>:<count> <bits>:<count> ...

Bitstrings are little-endian (qubit 0 is the last character). Blank lines
and lines starting with ``#`` are ignored.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

from ..records import CountsRecord
from ..topology import ParseError


def format_record(r: CountsRecord) -> str:
    hist = " ".join(f"{b}:{c}" for b, c in sorted(r.histogram.items()))
    return f"{r.pattern_id} {r.variant or '-'} {r.tau!r} {r.shots} {r.seed} {hist}"


def dumps_counts(records: Iterable[CountsRecord]) -> str:
    return "".join(format_record(r) + "\n" for r in records)


def parse_counts(text: str) -> list[CountsRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 6:
            raise ParseError("expected id, variant, tau, shots, seed and histogram", line=lineno)
        pid, variant, tau, shots, seed, *pairs = parts
        try:
            tau_f, shots_i, seed_i = float(tau), int(shots), int(seed)
        except ValueError as exc:
            raise ParseError(f"bad number: {exc}", line=lineno) from exc
        hist: dict[str, int] = {}
        for item in pairs:
            bits, sep, count = item.partition(":")
            if not sep or not bits or set(bits) - {"0", "1"} or not count.isdigit():
                raise ParseError(f"bad histogram entry {item!r}", line=lineno)
            if bits in hist:
                raise ParseError(f"duplicate bitstring {bits}", line=lineno)
            hist[bits] = int(count)
        try:
            out.append(CountsRecord(pid, tau_f, shots_i, seed_i, hist,
                                    "" if variant == "-" else variant))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    return out


def ingest_replay(path: str | Path) -> dict[tuple[str, float], CountsRecord]:
    """Records from a counts file keyed by (pattern id, tau)."""
    records = parse_counts(Path(path).read_text())
    index: dict[tuple[str, float], CountsRecord] = {}
    for r in records:
        key = (r.pattern_id, r.tau)
        if key in index:
            raise ParseError(f"duplicate record for pattern {r.pattern_id} at tau {r.tau}")
        index[key] = r
    return index
