#!/usr/bin/env python3
"""Regenerate the bundled device files (27-qubit Falcon, 127-qubit Eagle).

Coupling maps are the published heavy-hex layouts. Calibration is synthetic:
lifetimes and zz strengths are drawn from a seeded generator, with the
known ibmq_ehningen calibration values pinned on their qubits.
Non-pinned frequencies are redrawn until the only collision hits at default
thresholds are the two pinned collision triplets.
"""
import argparse
from pathlib import Path

import numpy as np

from qfunctest.analysis.collisions import detect_collisions
from qfunctest.device import DeviceModel, QubitParams, dump_device
from qfunctest.topology import ChipTopology

DATA = Path(__file__).resolve().parents[1] / "src" / "qfunctest" / "data"

FALCON_EDGES = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10), (8, 9),
    (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14), (14, 16), (15, 18),
    (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23), (22, 25), (23, 24),
    (24, 25), (25, 26),
]
# (row, col) grid positions of the Falcon layout
FALCON_RC = [
    (1, 0), (1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (0, 3), (1, 3), (3, 3), (4, 3),
    (1, 4), (3, 4), (1, 5), (2, 5), (3, 5), (1, 6), (3, 6), (0, 7), (1, 7), (3, 7),
    (4, 7), (1, 8), (3, 8), (1, 9), (2, 9), (3, 9), (3, 10),
]

# pinned (omega01 GHz, alpha GHz) so that
#   omega12(q24) = 4.7329 ~ omega01(q22) = 4.7251
#   omega02(q3) - omega01(q2) = 5.0709 ~ omega01(q5) = 5.0712
PINNED_FREQ = {
    22: (4.7251, -0.3310),
    24: (5.0680, -0.3351),
    5: (5.0712, -0.3320),
    3: (5.1800, -0.3400),
    2: (4.9491, -0.3330),
}
EXPECTED_HITS = {(24, 25, 22), (2, 3, 5)}
PINNED_ZZ = {(19, 20): 0.155, (12, 13): 0.163, (13, 14): 0.097,
             (0, 1): 0.126, (1, 2): 0.081, (1, 4): 0.081}
PINNED_T = {21: {"t1_us": 35.0}, 20: {"t2_us": 204.0}, 13: {"t2_us": 180.0},
            1: {"t2_us": 94.0}}


def eagle_topology() -> ChipTopology:
    rows = [list(range(0, 14)), list(range(18, 33)), list(range(37, 52)), list(range(56, 71)),
            list(range(75, 90)), list(range(94, 109)), list(range(113, 127))]
    col0 = [0, 0, 0, 0, 0, 0, 1]
    edges, rc = [], {}
    for r, row in enumerate(rows):
        for k, q in enumerate(row):
            rc[q] = (2 * r, col0[r] + k)
        edges += list(zip(row, row[1:]))
    bridges = {
        14: (0, 18), 15: (4, 22), 16: (8, 26), 17: (12, 30),
        33: (20, 39), 34: (24, 43), 35: (28, 47), 36: (32, 51),
        52: (37, 56), 53: (41, 60), 54: (45, 64), 55: (49, 68),
        71: (58, 77), 72: (62, 81), 73: (66, 85), 74: (70, 89),
        90: (75, 94), 91: (79, 98), 92: (83, 102), 93: (87, 106),
        109: (96, 114), 110: (100, 118), 111: (104, 122), 112: (108, 126),
    }
    for q, (up, down) in bridges.items():
        rc[q] = (rc[up][0] + 1, rc[up][1])
        edges += [(up, q), (q, down)]
    coords = [(float(rc[q][1]), float(rc[q][0])) for q in range(127)]
    return ChipTopology.build(127, edges, coords)


def falcon_topology() -> ChipTopology:
    return ChipTopology.build(27, FALCON_EDGES, [(float(c), float(r)) for r, c in FALCON_RC])


def synthetic_device(topo, rng, pinned_freq=(), pinned_zz=(), pinned_t=(), name=""):
    pinned_freq, pinned_zz, pinned_t = dict(pinned_freq), dict(pinned_zz), dict(pinned_t)
    n = topo.num_qubits
    t1 = rng.uniform(60, 150, n).round(1)
    t2 = np.minimum(rng.uniform(40, 220, n), 2 * t1).round(1)
    freqs = {q: (round(rng.uniform(4.80, 5.25), 4), round(rng.uniform(-0.345, -0.325), 4))
             for q in range(n)}
    freqs.update(pinned_freq)

    def build():
        qubits = []
        for q in range(n):
            rec = dict(t1_us=float(t1[q]), t2_us=float(t2[q]),
                       omega01_ghz=freqs[q][0], alpha_ghz=freqs[q][1])
            rec.update(pinned_t.get(q, {}))
            qubits.append(QubitParams(**rec))
        zz = {e: round(float(rng_zz[k]), 3) for k, e in enumerate(topo.sorted_edges())}
        zz.update(pinned_zz)
        return DeviceModel(qubits=tuple(qubits), zz_2pi_mhz=zz, name=name)

    rng_zz = rng.uniform(0.04, 0.17, len(topo.edges))
    wanted = set()
    for _ in range(500):
        dev = build()
        hits = detect_collisions(dev, topo)
        stray = [h for h in hits.entries if h.triplet.members not in EXPECTED_HITS]
        if not stray:
            wanted = {(h.triplet.a, h.triplet.b, h.triplet.c, h.kind) for h in hits.entries}
            return dev, wanted
        for h in stray:
            for q in h.triplet.members:
                if q not in pinned_freq:
                    freqs[q] = (round(rng.uniform(4.80, 5.25), 4),
                                round(rng.uniform(-0.345, -0.325), 4))
    raise RuntimeError("could not clear stray collisions")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    falcon = falcon_topology()
    dev, hits = synthetic_device(falcon, np.random.default_rng(args.seed), PINNED_FREQ,
                                 PINNED_ZZ, PINNED_T, name="ehningen")
    (args.out / "ehningen.json").write_text(dump_device(falcon, dev) + "\n")
    print("ehningen: collisions", sorted(hits))

    eagle = eagle_topology()
    assert len(eagle.edges) == 144
    dev = DeviceModel(qubits=(QubitParams(t1_us=100.0, t2_us=100.0),) * 127,
                      zz_2pi_mhz={e: 0.1 for e in eagle.sorted_edges()}, name="brisbane")
    (args.out / "brisbane.json").write_text(dump_device(eagle, dev) + "\n")
    print("brisbane:", eagle.num_qubits, "qubits,", len(eagle.edges), "edges")


if __name__ == "__main__":
    main()
