"""Decay and zz-oscillation fits.

Oscillation model, with Omega in rad/us::

    F(tau) = 1/2 * [1 + exp(-tau/T2) * prod_i cos(2 Omega_i tau)]

Fitted Omega values are reported as Omega/2pi in MHz, largest first.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import detrend, find_peaks

from .fidelity import FidelitySeries

EXPONENTIAL = "exponential"
ZZ_OSCILLATION = "zz-oscillation"

T_MAX_US = 1e4
MAX_ITERATIONS = 200
MAX_STARTS = 20
DEFAULT_OMEGA_MAX_2PI_MHZ = 0.5
TWO_PI = 2 * math.pi
SCAN_RATES = np.geomspace(1.0 / T_MAX_US, 0.2, 16)


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict[str, float]
    residual_rms: float
    converged: bool
    n_starts_used: int
    identifiable: bool = True
    stderr: dict[str, float] = field(default_factory=dict)

    @property
    def omegas(self) -> list[float]:
        """Omega_i / 2pi in MHz, sorted descending."""
        keys = sorted((k for k in self.params if k.startswith("omega_")),
                      key=lambda k: int(k.split("_")[1]))
        return [self.params[k] for k in keys]


def jittered_grid(n: int, t_max: float, seed: int = 0, t_min: float = 0.0) -> np.ndarray:
    """``n`` sorted delays, one drawn uniformly inside each of ``n`` equal strata.

    A uniform grid aliases any oscillation above its Nyquist rate; jittering
    the sample times breaks the aliasing at no cost in point count.
    """
    rng = np.random.default_rng(seed)
    edges = np.linspace(t_min, t_max, n + 1)
    return np.sort(edges[:-1] + rng.uniform(0.0, 1.0, n) * np.diff(edges))


def _param_stderr(res, names) -> dict[str, float]:
    dof = max(res.fun.size - res.x.size, 1)
    s2 = float(res.fun @ res.fun) / dof
    try:
        cov = np.linalg.pinv(res.jac.T @ res.jac) * s2
    except np.linalg.LinAlgError:
        return {}
    return {k: float(math.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(names)}


# --- exponential ----------------------------------------------------------------

def _exp_model(p, t):
    a, rate, c = p
    return a * np.exp(-t * rate) + c


def _exp_init(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    shifted = y - y.min()
    ok = shifted > 1e-3 * max(shifted.max(), 1e-12)
    if ok.sum() >= 2 and np.ptp(t[ok]) > 0:
        slope, intercept = np.polyfit(t[ok], np.log(shifted[ok]), 1)
        rate = -slope if slope < 0 else 1.0 / np.ptp(t)
        a = math.exp(intercept)
    else:
        rate, a = 1.0 / T_MAX_US, 0.0
    return (float(np.clip(a, 0.0, 1.5)), float(rate), float(np.clip(y.min(), -0.1, 1.0)))


def _fit_exp_arrays(t: np.ndarray, y: np.ndarray, time_name: str) -> FitResult:
    if t.size < 4:
        raise ValueError(f"exponential fit needs >= 4 points, got {t.size}")
    # fit the rate 1/T so that an infinitely slow decay sits on a finite bound
    lo = np.array([0.0, 1.0 / T_MAX_US, -0.1])
    hi = np.array([1.5, np.inf, 1.0])
    x0 = np.clip(_exp_init(t, y), lo + 1e-12, np.minimum(hi, 1e6))
    res = least_squares(lambda p: _exp_model(p, t) - y, x0, bounds=(lo, hi),
                        method="trf", max_nfev=MAX_ITERATIONS, x_scale="jac")
    a, rate, c = res.x
    T = 1.0 / rate
    at_bound = bool(T >= T_MAX_US * (1 - 1e-6) or a <= 1e-9)
    err = _param_stderr(res, ["A", "rate", "C"])
    stderr = {"A": err.get("A", math.nan), "C": err.get("C", math.nan),
              time_name: err.get("rate", math.nan) * T * T}
    return FitResult(
        model=EXPONENTIAL,
        params={"A": float(a), time_name: float(T), "C": float(c)},
        residual_rms=float(np.sqrt(np.mean(res.fun ** 2))),
        converged=bool(res.status > 0),
        n_starts_used=1,
        identifiable=not at_bound,
        stderr=stderr,
    )


def fit_exponential(series: FidelitySeries, time_name: str = "T1") -> FitResult:
    """Fit F = A exp(-tau/T) + C with T in (0, 1e4] us, A in [0, 1.5], C in [-0.1, 1].

    A flat series pushes T to its upper bound; the result is then marked
    ``identifiable=False``.
    """
    t = np.asarray(series.taus, dtype=float)
    y = np.asarray(series.values, dtype=float)
    return _fit_exp_arrays(t, y, time_name)


# --- zz oscillation -------------------------------------------------------------

def zz_model(t, t2_us: float, omegas_2pi_mhz) -> np.ndarray:
    """Closed-form echoed |+> fidelity; omegas given as Omega/2pi in MHz."""
    t = np.asarray(t, dtype=float)
    prod = np.ones_like(t)
    for w in omegas_2pi_mhz:
        prod = prod * np.cos(2 * TWO_PI * w * t)
    env = np.exp(-t / t2_us) if math.isfinite(t2_us) else 1.0
    return 0.5 * (1.0 + env * prod)


def _signal_model(p, t):
    # p = [rate, w_1, ..., w_n]; returns 2F - 1
    out = np.exp(-p[0] * t)
    for w in p[1:]:
        out = out * np.cos(2 * TWO_PI * w * t)
    return out


def periodogram(t: np.ndarray, s: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Power of a non-uniform DFT of ``s`` at ``freqs`` (cycles/us)."""
    phase = np.exp(-2j * np.pi * np.outer(freqs, t))
    return np.abs(phase @ s) ** 2


def _dft_starts(t, s, n, w_max) -> list[np.ndarray]:
    """Omega/2pi candidates built from the strongest periodogram peaks.

    A product of n cosines puts its lines at the sign combinations
    2|w_1 +- w_2 +- ...|, so besides the direct peak/2 reading, pairs of
    peaks p > q are decoded as w_a = (p+q)/4, w_b = (p-q)/4.
    """
    span = max(np.ptp(t), 1e-9)
    freqs = np.linspace(0.0, 2 * n * w_max, max(int(16 * 2 * n * w_max * span), 64))
    power = periodogram(t, detrend(s), freqs)
    idx, _ = find_peaks(power)
    peaks = [freqs[i] for i in sorted(idx, key=lambda i: -power[i])[:2 * n + 2]]
    if not peaks:
        return []
    singles = sorted({min(p / 2, w_max) for p in peaks}, reverse=True)
    pool = list(singles)
    for p, q in itertools.combinations(sorted(peaks, reverse=True), 2):
        pool += [(p + q) / 4, (p - q) / 4]
    pool = sorted({round(min(w, w_max), 6) for w in pool}, reverse=True)
    starts = [np.array((singles + [0.0] * n)[:n])]
    for combo in itertools.combinations_with_replacement(pool[:6], n):
        starts.append(np.array(combo))
    return starts


def _score(combos: np.ndarray, t: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residual sum of squares per Omega tuple, minimised over a decay-rate grid.

    Returns the scores and the best rate for each tuple.
    """
    best = np.full(len(combos), np.inf)
    best_rate = np.zeros(len(combos))
    for lo in range(0, len(combos), 20_000):
        chunk = combos[lo:lo + 20_000]
        prod = np.prod(np.cos(2 * TWO_PI * chunk[:, :, None] * t[None, None, :]), axis=1)
        out = np.full(len(chunk), np.inf)
        arg = np.zeros(len(chunk))
        for rate in SCAN_RATES:
            r = prod * np.exp(-rate * t)[None, :] - s[None, :]
            ss = np.einsum("ij,ij->i", r, r)
            better = ss < out
            out = np.where(better, ss, out)
            arg = np.where(better, rate, arg)
        best[lo:lo + len(chunk)] = out
        best_rate[lo:lo + len(chunk)] = arg
    return best, best_rate


def _grid_starts(t, s, n, w_max, keep, budget=60_000, beam=300) -> list[np.ndarray]:
    """Coarse-to-fine scan for (rate, Omega...) start vectors.

    Each stage scores tuples on an early-time window short enough that a
    tuple within half a grid step of the truth stays within about a radian
    of phase; the step then halves, the window doubles and the best tuples
    are expanded to their grid neighbours.
    """
    steps = 8
    while math.comb(steps + 1 + n, n) <= budget and steps < 2000:
        steps += 1
    h = w_max / steps
    grid = np.arange(steps + 1) * h
    cands = np.array(list(itertools.combinations_with_replacement(grid[::-1], n)))
    span = np.ptp(t)
    window = 1.0 / (TWO_PI * h)
    order = np.argsort(t)
    while True:
        mask = t <= t.min() + window
        if mask.sum() < n + 3:
            mask = order[: n + 3]
        score, rates = _score(cands, t[mask], s[mask])
        ranked = np.argsort(score, kind="stable")[:beam]
        top = cands[ranked]
        if window >= span:
            return [np.concatenate([[rates[i]], cands[i]]) for i in ranked[:keep]]
        h /= 2
        window *= 2
        offsets = np.array(list(itertools.product((-h, 0.0, h), repeat=n)))
        cands = np.clip(top[:, None, :] + offsets[None, :, :], 0.0, w_max).reshape(-1, n)
        cands = np.unique(-np.sort(-cands, axis=1), axis=0)


def _signal_jac(p, t):
    env = np.exp(-p[0] * t)
    phases = 2 * TWO_PI * np.outer(p[1:], t)  # (n, m)
    cos, sin = np.cos(phases), np.sin(phases)
    full = env * np.prod(cos, axis=0)
    cols = [-t * full]
    for k in range(len(p) - 1):
        others = np.prod(np.delete(cos, k, axis=0), axis=0)
        cols.append(-env * others * sin[k] * 2 * TWO_PI * t)
    return np.stack(cols, axis=1)


def _refine(t, s, x0, lo, hi):
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    return least_squares(lambda p: _signal_model(p, t) - s, x, jac=lambda p: _signal_jac(p, t),
                         bounds=(lo, hi), method="trf", max_nfev=MAX_ITERATIONS, x_scale="jac")


def fit_zz_oscillation(series: FidelitySeries, n_neighbors: int, *,
                       omega_max_2pi_mhz: float = DEFAULT_OMEGA_MAX_2PI_MHZ,
                       max_starts: int = MAX_STARTS, seed: int = 0,
                       master_equation: bool = False) -> FitResult:
    """Fit T2 and ``n_neighbors`` zz strengths to an echoed |+> series.

    Start points come from periodogram peaks of 2F-1 and from a coarse grid
    scan; up to ``max_starts`` of them are refined by bounded least squares
    over progressively longer windows and the lowest residual wins.
    ``master_equation=True`` polishes the winner against the Lindblad
    simulator instead of the closed form (slow; n_neighbors <= 3).
    """
    t = np.asarray(series.taus, dtype=float)
    s = 2.0 * np.asarray(series.values, dtype=float) - 1.0
    if n_neighbors < 0:
        raise ValueError("n_neighbors must be >= 0")
    if n_neighbors == 0:
        r = _fit_exp_arrays(t, s, "T2")
        return FitResult(ZZ_OSCILLATION, {"T2": r.params["T2"]}, r.residual_rms / 2,
                         r.converged, 1, r.identifiable, {"T2": r.stderr.get("T2", math.nan)})
    n = n_neighbors
    if t.size < 4 * (n + 1):
        raise ValueError(f"{n} neighbours need >= {4 * (n + 1)} points, got {t.size}")

    env = _fit_exp_arrays(t, np.abs(s), "T")
    rate0 = 1.0 / env.params["T"] if env.identifiable else 1.0 / 100.0
    dft = [np.concatenate([[rate0], w]) for w in _dft_starts(t, s, n, omega_max_2pi_mhz)]
    grid = _grid_starts(t, s, n, omega_max_2pi_mhz, keep=max_starts)
    # a quarter of the budget goes to periodogram readings, the rest to the grid scan
    chosen: list[np.ndarray] = []
    seen = set()
    for pool, quota in ((dft, max(1, max_starts // 4)), (grid, max_starts)):
        taken = 0
        for x in pool:
            x = np.concatenate([x[:1], np.sort(x[1:])[::-1]])
            key = tuple(np.round(x[1:], 4))
            if key in seen or taken >= quota or len(chosen) >= max_starts:
                continue
            seen.add(key)
            chosen.append(x)
            taken += 1
    rng = np.random.default_rng(seed)
    while len(chosen) < max_starts:
        chosen.append(np.concatenate([[rate0], rng.uniform(0, omega_max_2pi_mhz, n)]))

    lo = np.array([1.0 / T_MAX_US] + [0.0] * n)
    hi = np.array([np.inf] + [omega_max_2pi_mhz] * n)
    best = None
    for x in chosen:
        res = _refine(t, s, x, lo, hi)
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise ValueError("no start point could be refined")

    x = best.x
    if master_equation:
        polish = _polish_master_equation(t, s, x, lo, hi)
        x, resid, converged = polish.x, polish.fun, bool(polish.status > 0)
    else:
        resid = best.fun
        converged = bool(best.status > 0)
    names = ["rate"] + [f"omega_{i + 1}" for i in range(n)]
    err = _param_stderr(best, names)
    order = np.argsort(-x[1:], kind="stable")
    t2 = 1.0 / x[0]
    params = {"T2": float(t2)}
    stderr = {"T2": err.get("rate", math.nan) * t2 * t2}
    for rank, k in enumerate(order):
        params[f"omega_{rank + 1}"] = float(x[1 + k])
        stderr[f"omega_{rank + 1}"] = err.get(f"omega_{k + 1}", math.nan)
    return FitResult(
        model=ZZ_OSCILLATION,
        params=params,
        residual_rms=float(np.sqrt(np.mean(resid ** 2))) / 2,
        converged=converged,
        n_starts_used=len(chosen),
        identifiable=bool(t2 < T_MAX_US * (1 - 1e-6)),
        stderr=stderr,
    )


# --- master-equation-backed polish ------------------------------------------------

def _me_signal(p, t) -> np.ndarray:
    """2F-1 for an echoed |+> star cluster, integrated by the Lindblad solver."""
    from ..circuit import Gate, H, X  # local: the simulator imports this package
    from ..device import DeviceModel, QubitParams
    from ..simulator.lindblad import (ClusterState, apply_gate, build_zz_hamiltonian,
                                      collapse_ops, evolve_delay)

    n = len(p) - 1
    cluster = list(range(n + 1))
    dev = DeviceModel(qubits=(QubitParams(t2_us=1.0 / p[0]),) + (QubitParams(),) * n,
                      zz_2pi_mhz={(0, k): float(p[k]) for k in range(1, n + 1)})
    ham = build_zz_hamiltonian(dev, cluster)
    ops = collapse_ops(dev, cluster)
    plus = ClusterState.ground(cluster).rho
    for q in cluster:
        plus = apply_gate(plus, Gate(H, (q,)), cluster)
    echo = [("gate", Gate(X, (q,))) for q in cluster]
    out = np.empty_like(t)
    for i, tau in enumerate(t):
        sched = [("delay", tau / 2), *echo, ("delay", tau / 2)]
        rho = evolve_delay(ClusterState(tuple(cluster), plus.copy()), sched, ham, ops).rho
        for q in cluster:
            rho = apply_gate(rho, Gate(H, (q,)), cluster)
        p0 = np.real(np.diag(rho)).reshape(2, -1).sum(axis=1)[0]
        out[i] = 2.0 * p0 - 1.0
    return out


def _polish_master_equation(t, s, x0, lo, hi):
    return least_squares(lambda p: _me_signal(p, t) - s, x0, bounds=(lo, hi),
                         method="trf", max_nfev=40, diff_step=1e-4)
