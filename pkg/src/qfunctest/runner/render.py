"""Text, CSV and SVG output for failure maps and tables."""
from __future__ import annotations

import csv
import io
from typing import Sequence
from xml.sax.saxutils import escape

from ..analysis import FailureMap
from ..topology import ChipTopology

NEGATIVE = (33, 102, 172)   # blue end of the scale
MIDDLE = (247, 247, 247)
POSITIVE = (178, 24, 43)    # red end
SPACING = 60.0
RADIUS = 16.0


def diverging_color(value: float, limit: float) -> str:
    """Hex colour on a symmetric blue-white-red scale clipped to [-limit, limit]."""
    if limit <= 0:
        raise ValueError("colour scale limit must be positive")
    x = max(-1.0, min(1.0, value / limit))
    end = POSITIVE if x > 0 else NEGATIVE
    rgb = [round(m + abs(x) * (e - m)) for m, e in zip(MIDDLE, end)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _text(fmap: FailureMap) -> str:
    lines = [f"# map {fmap.label or '-'} tau_us={fmap.tau!r} threshold={fmap.threshold!r}",
             "# qubit delta_f flag"]
    for q, d, flag in fmap.to_rows():
        role = "spectator" if q in fmap.spectators else ("FLAG" if flag else "")
        lines.append(f"{q:>5} {d:+.6f} {role}".rstrip())
    if fmap.overlay:
        lines.append("# collision triplets: " +
                     " ".join("-".join(map(str, t.members)) for t in fmap.overlay))
    return "\n".join(lines) + "\n"


def _csv(fmap: FailureMap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["qubit", "delta_f", "flagged", "spectator"])
    for q, d, flag in fmap.to_rows():
        w.writerow([q, f"{d:.6f}", int(flag), int(q in fmap.spectators)])
    return buf.getvalue()


def _svg(fmap: FailureMap, topo: ChipTopology, limit: float) -> str:
    if not topo.coords:
        raise ValueError("svg output needs qubit coordinates in the device file")
    xs = [c[0] for c in topo.coords]
    ys = [c[1] for c in topo.coords]
    x0, y0 = min(xs), min(ys)

    def pos(q):
        x, y = topo.coords[q]
        return (x - x0) * SPACING + 2 * RADIUS, (y - y0) * SPACING + 2 * RADIUS

    width = (max(xs) - x0) * SPACING + 4 * RADIUS
    height = (max(ys) - y0) * SPACING + 4 * RADIUS + 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
           f'height="{height:.0f}" font-family="sans-serif" font-size="10">',
           f'<title>{escape(fmap.label or "failure map")} at tau = {fmap.tau:g} us</title>']
    for i, j in topo.sorted_edges():
        (x1, y1), (x2, y2) = pos(i), pos(j)
        out.append(f'<line class="edge" x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" '
                   f'y2="{y2:.1f}" stroke="#888" stroke-width="2"/>')
    for t in fmap.overlay:
        pts = " ".join("{:.1f},{:.1f}".format(*pos(q)) for q in t.members)
        out.append(f'<polyline class="collision" points="{pts}" fill="none" '
                   f'stroke="#e08214" stroke-width="6" stroke-opacity="0.6"/>')
    for q in range(topo.num_qubits):
        x, y = pos(q)
        d = fmap.delta.get(q, 0.0)
        flagged = q in fmap.flags
        stroke = 'stroke="#000" stroke-width="3"' if flagged else 'stroke="#444" stroke-width="1"'
        out.append(f'<circle class="qubit" data-qubit="{q}" data-delta="{d:.6f}" cx="{x:.1f}" '
                   f'cy="{y:.1f}" r="{RADIUS:.0f}" fill="{diverging_color(d, limit)}" {stroke}/>')
        label = f"{q}" + ("*" if flagged else "")
        out.append(f'<text x="{x:.1f}" y="{y + 3:.1f}" text-anchor="middle">{label}</text>')
        if flagged:
            out.append(f'<text class="annotation" x="{x:.1f}" y="{y - RADIUS - 3:.1f}" '
                       f'text-anchor="middle">{d:+.3f}</text>')
    out.append(f'<text x="4" y="{height - 8:.0f}">delta F scale: '
               f'{diverging_color(-limit, limit)} = -{limit:g}, '
               f'{diverging_color(limit, limit)} = +{limit:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_failure_map(fmap: FailureMap, topo: ChipTopology, fmt: str = "text",
                     limit: float = 0.2) -> str:
    if fmt == "text":
        return _text(fmap)
    if fmt == "csv":
        return _csv(fmap)
    if fmt == "svg":
        return _svg(fmap, topo, limit)
    raise ValueError(f"unknown map format {fmt!r}")


def collision_table(rows: Sequence[dict]) -> str:
    lines = ["a\tb\tc\ttype\tdetuning_mhz\tthreshold_mhz"]
    for r in rows:
        lines.append(f"{r['a']}\t{r['b']}\t{r['c']}\t{r['type']}\t"
                     f"{r['detuning_mhz']:.3f}\t{r['threshold_mhz']:g}")
    return "\n".join(lines) + "\n"


def fit_table(fits: Sequence[dict]) -> str:
    lines = ["pattern\tgroup\tmodel\tparams\tresidual_rms\tconverged\tidentifiable"]
    for f in fits:
        params = " ".join(f"{k}={v:.6g}" for k, v in f["params"].items())
        lines.append(f"{f['pattern']}\t{','.join(map(str, f['group']))}\t{f['model']}\t"
                     f"{params}\t{f['residual_rms']:.3g}\t{int(f['converged'])}\t"
                     f"{int(f['identifiable'])}")
    return "\n".join(lines) + "\n"
