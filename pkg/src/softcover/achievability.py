"""Upper bound E_a(R) on the strong converse exponent.

The production route is the Rényi dual: a one-dimensional concave
maximization over lambda in [0, 1] of lambda * (I_{1/(1+lambda)} - R).
:func:`ea_primal_oracle` minimizes the primal joint-distribution form
directly and exists to cross-check it.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from . import feasible
from ._search import golden_max
from .curve import ExponentCurve
from .prob import LN2, Pmf, _mat, _vec, kl_arr, mutual_info_arr, renyi_mi_arr

log = logging.getLogger(__name__)

SCAN_POINTS = 64


@dataclass
class AchievabilityResult:
    rate: float
    value: float
    optimizer_alpha: float
    optimizer_px: Pmf
    diagnostics: dict = field(default_factory=dict)

    @property
    def optimizer_lambda(self) -> float:
        return 1.0 / self.optimizer_alpha - 1.0


def dual_objective(lam: float, p: np.ndarray, W: np.ndarray, R: float) -> float:
    """lambda * (I_{1/(1+lambda)}(p, W) - R); zero at lambda = 0."""
    if lam <= 0.0:
        return 0.0
    return lam * (renyi_mi_arr(1.0 / (1.0 + lam), p, W) - R)


def ea_renyi(p, W, R: float, lambda_tol: float = 1e-7) -> AchievabilityResult:
    """E_a(R) at a fixed input distribution through the Rényi dual.

    A 65-point scan of lambda brackets the maximum and checks unimodality;
    golden-section search then refines inside the bracket. Plateaus resolve to
    the smallest maximizing lambda.
    """
    p, W = _vec(p), _mat(W)
    if R < 0:
        raise ValueError("rate must be non-negative")
    grid = np.linspace(0.0, 1.0, SCAN_POINTS + 1)
    scan = np.array([dual_objective(l, p, W, R) for l in grid])

    # a valley deeper than 1e-9 between two higher points breaks unimodality
    run_max_left = np.maximum.accumulate(scan)
    run_max_right = np.maximum.accumulate(scan[::-1])[::-1]
    valley = np.minimum(run_max_left, run_max_right) - scan
    unimodal = bool(valley.max() <= 1e-9)
    if not unimodal:
        log.warning("lambda objective not unimodal on the scan (valley %.3g)", valley.max())

    i = int(np.argmax(scan))
    best_l, best_v = grid[i], scan[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, SCAN_POINTS)]
    gl, gv, n = golden_max(lambda l: dual_objective(l, p, W, R), lo, hi, tol=lambda_tol)
    if gv > best_v + 1e-15:
        best_l, best_v = gl, gv

    clamped = False
    if best_v < 0:
        # unreachable with lambda = 0 on the scan; kept for round-off safety
        log.info("clamping negative dual value %.3g to 0", best_v)
        best_l, best_v, clamped = 0.0, 0.0, True
    if best_v == 0.0:
        best_l = 0.0

    diag = dict(evaluations=len(grid) + n, unimodal=unimodal,
                refine_delta=float(best_v - scan[i]), clamped=clamped,
                scan_max_valley=float(valley.max()))
    return AchievabilityResult(float(R), float(best_v), 1.0 / (1.0 + best_l), Pmf(p), diag)


# ---------------------------------------------------------------------------
# primal oracle

class OracleTooLarge(ValueError):
    pass


@lru_cache(maxsize=16)
def composition_lattice(total: int, parts: int) -> np.ndarray:
    """All vectors of ``parts`` non-negative integers summing to ``total``."""
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(parts)])
    out = np.array(rows, dtype=np.int64).reshape(-1, parts)
    out.setflags(write=False)
    return out


def _lattice_total(parts: int, min_points: int) -> int:
    total = 1
    while math.comb(total + parts - 1, parts - 1) < min_points:
        total += 1
    return total


class _Primal:
    """Objective D(Q||P_XY) + |D(Q||P_X Q_Y) - R|^+ restricted to supp(P_XY)."""

    def __init__(self, p, W, R):
        self.P = p[:, None] * W
        self.cells = np.flatnonzero(self.P.ravel() > 0)
        self.shape = self.P.shape
        self.p = p
        self.R = R
        self.Pc = self.P.ravel()[self.cells]

    def full(self, Q):
        out = np.zeros(Q.shape[:-1] + (self.shape[0] * self.shape[1],))
        out[..., self.cells] = Q
        return out.reshape(Q.shape[:-1] + self.shape)

    def parts(self, Q):
        d1 = kl_arr(Q, self.Pc)
        full = self.full(Q)
        qy = full.sum(axis=-2)
        ref = self.p[:, None] * qy[..., None, :]
        flat = Q.shape[:-1] + (self.shape[0] * self.shape[1],)
        d2 = kl_arr(full.reshape(flat), np.broadcast_to(ref, full.shape).reshape(flat))
        return d1, d2

    def __call__(self, Q):
        d1, d2 = self.parts(Q)
        return d1 + np.maximum(d2 - self.R, 0.0)


def _pairwise_descent(obj, Q, step, step_tol=1e-7):
    """Move mass between pairs of cells while it lowers the objective."""
    best = float(obj(Q))
    K = Q.size
    while step >= step_tol:
        improved = False
        for i, j in itertools.permutations(range(K), 2):
            if Q[i] < step:
                continue
            cand = Q.copy()
            cand[i] -= step
            cand[j] += step
            v = float(obj(cand))
            if v < best - 1e-15:
                Q, best, improved = cand, v, True
        if not improved:
            step /= 2
    return Q, best


def _softmax(z):
    e = np.exp(z - z.max())
    return e / e.sum()


def _smooth_polish(obj: _Primal, start: np.ndarray) -> list[np.ndarray]:
    """Solve the two smooth convex pieces of the objective from ``start``.

    Piece A: min D1 subject to D2 <= R. Piece B: min D1 + D2 - R without
    constraint. Every returned point is re-scored with the exact objective
    by the caller, so these only need to be good candidates.
    """
    z0 = np.log(np.clip(start, 1e-12, None))
    d1 = lambda z: float(obj.parts(_softmax(z))[0])
    d2 = lambda z: float(obj.parts(_softmax(z))[1])
    out = []
    try:
        a = minimize(d1, z0, method="SLSQP",
                     constraints=[{"type": "ineq", "fun": lambda z: obj.R - d2(z)}],
                     options=dict(ftol=1e-14, maxiter=500))
        out.append(_softmax(a.x))
    except (ValueError, FloatingPointError):
        pass
    b = minimize(lambda z: d1(z) + d2(z), z0, method="BFGS", options=dict(gtol=1e-10))
    out.append(_softmax(b.x))
    return out


def ea_primal_oracle(p, W, R: float, min_lattice_points: int = 100_000) -> float:
    """min over joint Q of D(Q||P_XY) + |D(Q||P_X Q_Y) - R|^+, by brute force.

    Dirichlet lattice scan, pairwise mass-transfer descent from the best
    lattice points, then a smooth polish of the two convex pieces of the
    objective. Only for ``|X||Y| <= 9``.
    """
    p, W = _vec(p), _mat(W)
    if W.size > 9:
        raise OracleTooLarge(f"primal oracle limited to |X||Y| <= 9, got {W.size}")
    obj = _Primal(p, W, R)
    K = obj.cells.size
    if K == 1:
        return float(obj(np.ones(1)))

    total = _lattice_total(K, min_lattice_points)
    lattice = composition_lattice(total, K) / total
    vals = obj(lattice)
    order = np.argsort(vals, kind="stable")

    cands = [obj.Pc.copy()]
    for i in order[:1]:
        Q, _ = _pairwise_descent(obj, lattice[i].copy(), 1.0 / total)
        cands.append(Q)
    best = min(cands, key=lambda Q: float(obj(Q)))
    cands += _smooth_polish(obj, best)
    return float(min(min(float(obj(Q)) for Q in cands), vals[order[0]]))


# ---------------------------------------------------------------------------
# variational identities

def gibbs_min(f, P_Y) -> float:
    """min over Q of D(Q||P_Y) + E_Q[f], in closed form -log2 E_P[2^-f]."""
    py = _vec(P_Y)
    f = np.asarray(f, dtype=float)
    live = py > 0
    return float(-logsumexp(np.log(py[live]) - f[live] * LN2) / LN2)


def tilted_inner_min(lam: float, Q_Y, backward, iota) -> float:
    """min over V-bar of D(V-bar||W-bar|Q_Y) + lam * E[iota], closed form.

    Returns -sum_y Q_Y(y) log2 sum_x W-bar(x|y) 2^{-lam iota(x,y)}.
    ``iota`` is indexed ``[x, y]``; entries off the joint support are ignored.
    """
    qy = _vec(Q_Y)
    back = np.asarray(backward, dtype=float)  # rows indexed by y
    iota = np.asarray(iota, dtype=float)
    total = 0.0
    for y in np.flatnonzero(qy > 0):
        row = back[y]
        live = row > 0
        lse = logsumexp(np.log(row[live]) - lam * iota[live, y] * LN2)
        total -= qy[y] * lse / LN2
    return float(total)


# ---------------------------------------------------------------------------

def ea_curve(W, P_Y, rates, resolution: int = 33, lambda_tol: float = 1e-7) -> ExponentCurve:
    """E_a on a rate grid, minimizing the dual value over the feasible set."""
    W = _mat(W)
    poly = feasible.build(W, P_Y)
    rates = np.asarray(rates, dtype=float)
    values, alphas, argmins, diags = [], [], [], []
    for R in rates:
        d = {}
        px, _ = feasible.minimize_over(
            poly, lambda q: ea_renyi(q, W, R, lambda_tol).value, resolution, diagnostics=d)
        res = ea_renyi(px, W, R, lambda_tol)
        d.update(res.diagnostics, mutual_info=mutual_info_arr(px.probs, W))
        values.append(res.value)
        alphas.append(res.optimizer_alpha)
        argmins.append(px.probs)
        diags.append(d)
    curve = ExponentCurve("achievability", rates, np.array(values), np.array(alphas), argmins, diags)
    if curve.monotonicity_violation() > 1e-9:
        log.warning("E_a curve increases by %.3g somewhere", curve.monotonicity_violation())
    return curve
