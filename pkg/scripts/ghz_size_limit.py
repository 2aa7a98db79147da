#!/usr/bin/env python3
"""Mean GHZ fidelity against chain length on a device file.

Prints the table and, per delay, the longest chain whose mean fidelity
stays above --floor.
"""
import argparse
from importlib import resources
from pathlib import Path

from qfunctest.device import load_device
from qfunctest.runner import ghz_study
from qfunctest.runner.cli import parse_floats, parse_range


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--device", help="device JSON (default: bundled 27-qubit snapshot)")
    ap.add_argument("--lengths", type=parse_range, default=parse_range("2..6"))
    ap.add_argument("--samples", type=int, default=10)
    ap.add_argument("--taus", type=parse_floats, default=[0.0, 5.0, 10.0, 21.0, 50.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--floor", type=float, default=0.5)
    args = ap.parse_args()

    if args.device:
        text = Path(args.device).read_text()
    else:
        text = resources.files("qfunctest").joinpath("data/ehningen.json").read_text()
    topo, dev = load_device(text)
    stats = ghz_study(topo, dev, args.lengths, args.samples, args.seed, args.taus)

    print("N\t" + "\t".join(f"tau={t:g}" for t in args.taus))
    for s in stats:
        print(f"{s.length}\t" + "\t".join(f"{m:.3f}+-{e:.3f}" for m, e in zip(s.mean, s.stderr)))
    for i, tau in enumerate(args.taus):
        ok = [s.length for s in stats if s.mean[i] >= args.floor]
        print(f"tau={tau:g} us: longest chain with F >= {args.floor:g}: {max(ok) if ok else '-'}")


if __name__ == "__main__":
    main()
