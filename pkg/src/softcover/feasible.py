"""The input set S = {P_X : P_X W = P_Y} and minimization over it."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import null_space

from .prob import Pmf, _mat, _vec

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
MAX_INPUTS = 8
MAX_EVALS = 10**6


class Infeasible(ValueError):
    """The target output is not reachable under the channel."""


@dataclass(frozen=True, eq=False)
class FeasiblePolytope:
    channel: np.ndarray
    target: np.ndarray
    anchor: np.ndarray
    basis: np.ndarray  # shape (k, |X|), orthonormal rows
    vertices: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_singleton(self) -> bool:
        return len(self.vertices) == 1

    def residual(self, p: np.ndarray) -> float:
        return float(np.max(np.abs(p @ self.channel - self.target)))

    def point(self, coeffs: np.ndarray) -> np.ndarray:
        return self.anchor + coeffs @ self.basis


def build(W, P_Y) -> FeasiblePolytope:
    """Anchor point and null-space directions of S for channel ``W``.

    Vertices of the slice ``{p >= 0, pW = P_Y, sum p = 1}`` are enumerated as
    basic solutions; the anchor is their centroid. Raises :class:`Infeasible`
    when there is no vertex.
    """
    W, py = _mat(W), _vec(P_Y)
    nx, ny = W.shape
    if py.size != ny:
        raise ValueError(f"target has {py.size} symbols, channel outputs {ny}")
    if nx > MAX_INPUTS:
        raise ValueError(f"vertex enumeration supports at most {MAX_INPUTS} inputs")
    A = np.vstack([W.T, np.ones(nx)])
    b = np.append(py, 1.0)
    rank = np.linalg.matrix_rank(A)

    verts = []
    for cols in itertools.combinations(range(nx), rank):
        sub = A[:, cols]
        if np.linalg.matrix_rank(sub) < rank:
            continue
        sol, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if np.max(np.abs(sub @ sol - b)) > FEAS_TOL or sol.min() < -FEAS_TOL:
            continue
        v = np.zeros(nx)
        v[list(cols)] = np.clip(sol, 0, None)
        v /= v.sum()
        if not any(np.allclose(v, u, atol=1e-12) for u in verts):
            verts.append(v)
    if not verts:
        raise Infeasible("P_Y not reachable under W")

    verts = np.array(verts)
    anchor = verts.mean(axis=0)
    basis = null_space(A).T if len(verts) > 1 else np.zeros((0, nx))
    return FeasiblePolytope(W, py, anchor, basis, verts)


def _lattice_axes(poly: FeasiblePolytope, resolution: int) -> list[np.ndarray]:
    coeffs = (poly.vertices - poly.anchor) @ poly.basis.T
    lo, hi = coeffs.min(axis=0), coeffs.max(axis=0)
    k = poly.dim
    res = resolution
    while res**k > MAX_EVALS and res > 2:
        res -= 1
    return [np.linspace(l, h, res) if h - l > 1e-14 else np.array([0.0]) for l, h in zip(lo, hi)]


def _in_simplex(p: np.ndarray) -> bool:
    return p.min() >= -1e-12


def minimize_over(poly: FeasiblePolytope, objective: Callable[[Pmf], float],
                  resolution: int = 33, step_tol: float = 1e-6,
                  diagnostics: dict | None = None) -> tuple[Pmf, float]:
    """Minimize ``objective`` over the feasible polytope.

    A lattice over the basis coefficients (``resolution`` points per
    dimension, coarsened to at most 10^6 points) is scanned in lexicographic
    order, then the best point is refined by coordinate descent until the
    step falls below ``step_tol``. Ties keep the first lattice point.
    """
    diag = diagnostics if diagnostics is not None else {}

    def ev(p):
        p = np.clip(p, 0, None)
        return objective(Pmf(p / p.sum())), p / p.sum()

    anchor_val, anchor_p = ev(poly.anchor)
    diag.update(evaluations=1, ties=0, convexity_violations=0)
    if poly.dim == 0 or poly.is_singleton:
        return Pmf(anchor_p), anchor_val

    axes = _lattice_axes(poly, resolution)
    pts, vals = [], []
    for c in itertools.product(*axes):
        c = np.array(c)
        p = poly.point(c)
        if not _in_simplex(p):
            continue
        v, _ = ev(p)
        pts.append(c)
        vals.append(v)
    vals = np.array(vals)
    diag["evaluations"] += len(vals)

    i = int(np.argmin(vals))
    best_c, best_v = pts[i], vals[i]
    diag["ties"] = int(np.sum(np.abs(vals - best_v) <= 1e-12)) - 1
    if anchor_val < best_v:
        best_c, best_v = np.zeros(poly.dim), anchor_val

    # midpoint convexity spot-check on a few lattice pairs
    rng = np.random.default_rng(0)
    for _ in range(min(8, len(pts) // 2)):
        a, b = rng.choice(len(pts), 2, replace=False)
        mid, _ = ev(poly.point((pts[a] + pts[b]) / 2))
        if mid > (vals[a] + vals[b]) / 2 + 1e-9:
            diag["convexity_violations"] += 1
    if diag["convexity_violations"]:
        log.warning("objective failed %d midpoint convexity checks", diag["convexity_violations"])

    steps = np.array([ax[1] - ax[0] if len(ax) > 1 else 0.0 for ax in axes])
    start_v = best_v
    while steps.max() >= step_tol:
        improved = False
        for d in range(poly.dim):
            if steps[d] < step_tol:
                continue
            for sign in (1.0, -1.0):
                c = best_c.copy()
                c[d] += sign * steps[d]
                p = poly.point(c)
                if not _in_simplex(p):
                    continue
                v, _ = ev(p)
                diag["evaluations"] += 1
                if v < best_v:
                    best_c, best_v, improved = c, v, True
                    break
        if not improved:
            steps /= 2
    diag["refinement_delta"] = float(start_v - best_v)

    p = np.clip(poly.point(best_c), 0, None)
    return Pmf(p / p.sum()), float(best_v)
