"""Self-check suites: closed forms and solvers against brute-force oracles.

Each suite returns ``(passed, total, worst)`` where ``worst`` is the largest
observed discrepancy (or smallest margin for one-sided bounds).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np

from . import achievability as ach
from . import converse as conv
from . import method_of_types as mot
from . import simulation as sim
from .prob import (backward_of, entropy_arr, info_density, kl_arr,
                   mutual_info_arr)

SEED = 20240917


def simplex_grid(k: int, min_points: int) -> np.ndarray:
    total = ach._lattice_total(k, min_points)
    return ach.composition_lattice(total, k) / total


def zoom_simplex_min(fun, k: int, min_points: int = 10_000, zooms: int = 3) -> float:
    """Brute-force min of a vectorized ``fun`` over the k-simplex.

    A composition lattice is scanned first; each zoom re-grids a box of +-2
    cells around the incumbent in the first k-1 coordinates.
    """
    Q = simplex_grid(k, min_points)
    vals = fun(Q)
    i = int(np.argmin(vals))
    best, center = float(vals[i]), Q[i]
    h = 1.0 / ach._lattice_total(k, min_points)
    per_dim = max(3, int(round(min_points ** (1.0 / max(k - 1, 1)))))
    for _ in range(zooms):
        axes = [np.linspace(c - 2 * h, c + 2 * h, per_dim) for c in center[:-1]]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k - 1)
        pts = np.hstack([pts, 1 - pts.sum(axis=1, keepdims=True)])
        pts = pts[np.all(pts >= 0, axis=1)]
        vals = fun(pts)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, center = float(vals[i]), pts[i]
        h = 4 * h / (per_dim - 1)
    return best


# --- oracles ---------------------------------------------------------------

def gibbs_grid_oracle(f: np.ndarray, py: np.ndarray, min_points: int = 10_000) -> float:
    return zoom_simplex_min(lambda Q: kl_arr(Q, py) + Q @ f, py.size, min_points)


def tilted_grid_oracle(lam: float, qy: np.ndarray, back: np.ndarray, iota: np.ndarray,
                       min_points: int = 10_000) -> float:
    """min over backward channels of D(Vbar||Wbar|Q_Y) + lam E[iota], one y at a time."""
    nx = back.shape[1]
    total = 0.0
    for y in np.flatnonzero(qy > 0):
        col = np.nan_to_num(iota[:, y])
        fun = lambda V: kl_arr(V, back[y]) + lam * (V @ col)
        total += qy[y] * zoom_simplex_min(fun, nx, min_points)
    return total


def binary_out_grid_oracle(q: np.ndarray, W: np.ndarray, s: float, points: int = 400,
                           zooms: int = 2) -> float:
    """min D(V||W|q) over binary V with H(V|q) >= H(W|q) + s on a zooming grid.

    V is parametrized by its two crossover probabilities a = V(1|0),
    b = V(0|1); each zoom re-grids a +-2 cell window around the incumbent.
    """
    target = float(q @ entropy_arr(W)) + s
    lo_a, hi_a, lo_b, hi_b = 0.0, 1.0, 0.0, 1.0
    best = math.inf
    for _ in range(zooms + 1):
        a = np.linspace(lo_a, hi_a, points)
        b = np.linspace(lo_b, hi_b, points)
        A, B = np.meshgrid(a, b, indexing="ij")
        V = np.stack([np.stack([1 - A, A], -1), np.stack([B, 1 - B], -1)], -2)
        H = np.einsum("x,...x->...", q, entropy_arr(V))
        D = np.einsum("x,...x->...", q, kl_arr(V, W))
        D = np.where(H >= target, D, np.inf)
        i, j = np.unravel_index(np.argmin(D), D.shape)
        if D[i, j] < best:
            best = float(D[i, j])
            ca, cb = a[i], b[j]
        da, db = 2 * (a[1] - a[0]), 2 * (b[1] - b[0])
        lo_a, hi_a = max(ca - da, 0.0), min(ca + da, 1.0)
        lo_b, hi_b = max(cb - db, 0.0), min(cb + db, 1.0)
    return best


def random_channel(rng, nx, ny, floor=0.02):
    W = rng.dirichlet(np.ones(ny), size=nx)
    W = (1 - floor * ny) * W + floor  # keep full support away from the boundary
    return W / W.sum(axis=1, keepdims=True)


# --- suites ------------------------------------------------------------------

def suite_binomial(M_max: int = 200) -> tuple[int, int, float]:
    p = np.arange(1, 1000) / 1000
    margins = sim.binomial_bound_sweep(range(2, M_max + 1), p)
    ok = margins >= -1e-12
    return int(ok.sum()), int(ok.size), float(margins.min())


def suite_divergence_split(instances: int = 100, seed: int = SEED) -> tuple[int, int, float]:
    rng = np.random.default_rng([seed, 2])
    worst, passed = 0.0, 0
    for _ in range(instances):
        nx, ny = rng.integers(2, 5, size=2)
        Q = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
        P = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
        qy, vbar = backward_of(Q)
        py, wbar = backward_of(P)
        px = P.sum(axis=1)
        cond = float(qy.probs @ kl_arr(vbar.rows, wbar.rows))
        iota = info_density(P)
        e1 = abs(kl_arr(Q.ravel(), P.ravel()) - (cond + kl_arr(qy.probs, py.probs)))
        ref = px[:, None] * qy.probs[None, :]
        e2 = abs(kl_arr(Q.ravel(), ref.ravel()) - (cond + float(np.sum(Q * iota))))
        err = max(e1, e2)
        worst = max(worst, err)
        passed += err <= 1e-10
    return passed, instances, worst


def suite_gibbs(instances: int = 100, seed: int = SEED) -> tuple[int, int, float]:
    rng = np.random.default_rng([seed, 3])
    worst, passed = 0.0, 0
    for _ in range(instances):
        py = rng.dirichlet(np.ones(3))
        f = rng.uniform(-2, 2, size=3)
        err = abs(ach.gibbs_min(f, py) - gibbs_grid_oracle(f, py))
        worst = max(worst, err)
        passed += err <= 1e-3
    return passed, instances, worst


def suite_tilted_inner(instances: int = 100, seed: int = SEED) -> tuple[int, int, float]:
    rng = np.random.default_rng([seed, 4])
    worst, passed = 0.0, 0
    for _ in range(instances):
        P = rng.dirichlet(np.ones(9)).reshape(3, 3)
        _, wbar = backward_of(P)
        iota = info_density(P)
        qy = rng.dirichlet(np.ones(3))
        lam = rng.uniform(-1, 2)
        closed = ach.tilted_inner_min(lam, qy, wbar.rows, iota)
        err = abs(closed - tilted_grid_oracle(lam, qy, wbar.rows, iota))
        worst = max(worst, err)
        passed += err <= 1e-3
    return passed, instances, worst


def suite_dual_primal(channels: int = 20, seed: int = SEED) -> tuple[int, int, float]:
    rng = np.random.default_rng([seed, 5])
    worst, passed, total = 0.0, 0, 0
    for c in range(channels):
        k = 2 if c % 2 == 0 else 3
        W = random_channel(rng, k, k)
        p = rng.dirichlet(np.ones(k))
        I = mutual_info_arr(p, W)
        for j in range(10):
            R = 0.1 * j * I
            err = abs(ach.ea_renyi(p, W, R).value - ach.ea_primal_oracle(p, W, R))
            worst = max(worst, err)
            passed += err <= 5e-3
            total += 1
    return passed, total, worst


def suite_tilted_family(channels: int = 20, seed: int = SEED) -> tuple[int, int, float]:
    rng = np.random.default_rng([seed, 6])
    worst, passed = 0.0, 0
    for _ in range(channels):
        W = random_channel(rng, 2, 2)
        q = rng.dirichlet(np.ones(2))
        h_w = float(q @ entropy_arr(W))
        s = rng.uniform(0, 1 - h_w)
        val, _ = conv.inner_min_out(q, W, s)
        err = abs(val - binary_out_grid_oracle(q, W, s))
        worst = max(worst, err)
        passed += err <= 1e-3
    return passed, channels, worst


def suite_balance(instances: int = 20, seed: int = SEED) -> tuple[int, int, float]:
    """Every bisection trace has non-increasing f and non-decreasing g."""
    rng = np.random.default_rng([seed, 7])
    passed = 0
    for _ in range(instances):
        W = random_channel(rng, 2, 2)
        px = rng.dirichlet(np.ones(2))
        py = px @ W
        q = rng.dirichlet(np.ones(2))
        R = rng.uniform(0, mutual_info_arr(px, W))
        sol = conv.balance_s(q, W, py, R, check=False)
        passed += sol.monotone
    return passed, instances, 0.0


def suite_types(n_max: int = 20) -> tuple[int, int, float]:
    """Type-class sandwich and exact probability partition, rational arithmetic."""
    passed = total = 0
    worst = math.inf
    for k in (2, 3):
        probs = [Fraction(1, 3), Fraction(2, 3)] if k == 2 else [Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)]
        for n in range(1, n_max + 1):
            mass = Fraction(0)
            for t in mot.enumerate_types(n, k):
                size = mot.type_class_size(t)
                term = Fraction(size)
                for c, p in zip(t.counts, probs):
                    term *= p**c
                mass += term
                h = float(entropy_arr(t.pmf))
                lo = n * h - k * math.log2(n + 1)
                margin = min(math.log2(size) - lo, n * h - math.log2(size))
                worst = min(worst, margin)
                passed += margin >= -1e-9
                total += 1
            passed += mass == 1
            total += 1
    return passed, total, worst


SUITES: dict[str, Callable[[], tuple[int, int, float]]] = {
    "binomial": suite_binomial,
    "divergence_split": suite_divergence_split,
    "gibbs": suite_gibbs,
    "tilted_inner": suite_tilted_inner,
    "dual_primal": suite_dual_primal,
    "tilted_family": suite_tilted_family,
    "balance": suite_balance,
    "types": suite_types,
}
