#!/usr/bin/env python3
"""Recovery rate of the zz-oscillation fit on synthetic echoed |+> data.

For each calibration row (T2, neighbour strengths) draw binomial counts on a
jittered delay grid, fit, and count how often every parameter lands inside
the tolerance band.
"""
import argparse
import time

import numpy as np

from qfunctest.analysis import FidelitySeries, fit_zz_oscillation
from qfunctest.analysis.fitting import jittered_grid, zz_model

ROWS = {
    "q20": (204.0, [0.155]),
    "q13": (180.0, [0.163, 0.097]),
    "q1": (94.0, [0.126, 0.081, 0.081]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--shots", type=int, default=2500)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--t-max", type=float, default=100.0)
    ap.add_argument("--grid-seed", type=int, default=7)
    ap.add_argument("--omega-tol", type=float, default=0.015, help="MHz, on Omega/2pi")
    ap.add_argument("--t2-tol", type=float, default=0.15, help="relative")
    args = ap.parse_args()

    t = jittered_grid(args.points, args.t_max, seed=args.grid_seed)
    print("row\tT2\tomegas\thits\tmedian_T2\tmedian_omegas\tsec_per_fit")
    for name, (t2, om) in ROWS.items():
        f = zz_model(t, t2, om)
        hits, t2s, oms = 0, [], []
        t0 = time.perf_counter()
        for rep in range(args.reps):
            rng = np.random.default_rng(rep)
            y = rng.binomial(args.shots, np.clip(f, 0, 1)) / args.shots
            fit = fit_zz_oscillation(FidelitySeries.from_values({0}, t, y, args.shots),
                                     len(om), seed=rep)
            ok = abs(fit.params["T2"] - t2) <= args.t2_tol * t2 and all(
                abs(a - b) <= args.omega_tol for a, b in zip(fit.omegas, sorted(om, reverse=True)))
            hits += ok
            t2s.append(fit.params["T2"])
            oms.append(fit.omegas)
        per = (time.perf_counter() - t0) / args.reps
        med = np.median(oms, axis=0)
        print(f"{name}\t{t2:g}\t{','.join(map(str, om))}\t{hits}/{args.reps}\t"
              f"{np.median(t2s):.1f}\t{','.join(f'{x:.4f}' for x in med)}\t{per:.2f}")


if __name__ == "__main__":
    main()
