"""Lower bound E_c(R) on the strong converse exponent.

For an input type ``q`` the exponent is the value at which two monotone
functions of the entropy slack ``s`` cross:

* ``f(s)``: min of D(qV||P_Y) + |I(q;V) - R|^+ over V with
  H(V|q) <= H(W|q) + s  (non-increasing in s),
* ``g(s)``: min of D(V||W|q) over V with H(V|q) >= H(W|q) + s
  (non-decreasing in s).

``g`` is solved exactly on the tilted family V ~ W^t. For ``f``, fixing the
output marginal Q_Y = qV leaves an objective that only depends on H(V|q) and
does not increase with it, so the best V has entropy min(cap, H(Q_Y)) and is
available whenever the minimum-entropy coupling of (q, Q_Y) fits under the
cap. That turns ``f`` into a search over Q_Y alone.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._search import golden_min
from .achievability import composition_lattice
from .curve import ExponentCurve
from .prob import Channel, Pmf, _mat, _vec, entropy_arr, kl_arr

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-9


class MonotonicityError(RuntimeError):
    """An inner solver produced a non-monotone f or g along the s search."""


@dataclass(frozen=True)
class ConverseInstance:
    channel: np.ndarray
    target: np.ndarray
    rate: float = 0.0
    qx_resolution: int = 32
    v_resolution: int = 256
    s_tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "channel", _mat(self.channel))
        object.__setattr__(self, "target", _vec(self.target))
        if self.qx_resolution < 16 or self.v_resolution < 16:
            raise ValueError("lattice resolutions must be at least 16")
        if self.s_tolerance <= 0:
            raise ValueError("s tolerance must be positive")
        if self.channel.shape[1] != self.target.size:
            raise ValueError("target size does not match channel outputs")


@dataclass
class BalancedSolution:
    qx: Pmf
    s_star: float
    value: float
    inner_in_value: float
    inner_out_value: float
    v_in: Channel | None
    v_out: Channel | None
    trace: list[tuple[float, float, float]] = field(default_factory=list, repr=False)
    slope_bound: float = 0.0
    plateau_width: float = 0.0

    @property
    def monotone(self) -> bool:
        return _trace_monotone(self.trace)


def _trace_monotone(trace) -> bool:
    if len(trace) < 2:
        return True
    s, f, g = np.array(sorted(trace)).T
    # g is +inf once no channel reaches the entropy; inf-after-inf is monotone
    g_ok = all(b >= a - MONOTONE_SLACK for a, b in zip(g, g[1:]))
    return bool(np.all(np.diff(f) <= MONOTONE_SLACK) and g_ok)


# ---------------------------------------------------------------------------
# out-of-set minimum: tilted family

def _tilt(W: np.ndarray, t: float) -> np.ndarray:
    V = np.where(W > 0, np.power(W, t, where=W > 0, out=np.zeros_like(W)), 0.0)
    return V / V.sum(axis=1, keepdims=True)


def inner_min_out(q, W, s: float) -> tuple[float, Channel | None]:
    """min D(V||W|q) over V with H(V|q) >= H(W|q) + s.

    The minimizer lies on V_t ~ W^t, t in [0, 1], whose conditional entropy
    decreases in t; t is bisected until the entropy constraint is tight.
    Returns ``(inf, None)`` when no channel reaches the required entropy.
    """
    q, W = _vec(q), _mat(W)
    return _min_out(q, W, s)


def _min_out(q: np.ndarray, W: np.ndarray, s: float, h_tol: float = 1e-10):
    if s <= 0:
        return 0.0, Channel(W)
    target = float(q @ entropy_arr(W)) + s
    support = (W > 0).sum(axis=1)
    h_max = float(q @ np.log2(support))
    if target > h_max + 1e-12:
        return math.inf, None

    def h(t):
        return float(q @ entropy_arr(_tilt(W, t)))

    lo, hi = 0.0, 1.0  # h(lo) >= target > h(hi)
    if target < h_max - 1e-12:
        while hi - lo > 1e-15:
            mid = 0.5 * (lo + hi)
            hm = h(mid)
            if hm >= target:
                lo = mid
                if hm - target <= h_tol:
                    break
            else:
                hi = mid
    V = _tilt(W, lo)
    rows = q > 0
    return float(q[rows] @ kl_arr(V[rows], W[rows])), Channel(V)


# ---------------------------------------------------------------------------
# in-set minimum: reduction to the output marginal

class _CouplingTable:
    """Vertices of the transportation polytope with row sums ``q``.

    Every basis of the marginal constraints is pre-factored so that the
    minimum-entropy coupling for many column marginals is one matmul per
    basis.
    """

    def __init__(self, q: np.ndarray, ny: int):
        self.q = q
        self.ny = ny
        m = q.size
        A = np.zeros((m + ny, m * ny))
        for x in range(m):
            A[x, x * ny:(x + 1) * ny] = 1.0
        for y in range(ny):
            A[m + y, y::ny] = 1.0
        r = m + ny - 1
        self.bases = []
        for cells in itertools.combinations(range(m * ny), r):
            sub = A[:, cells]
            if np.linalg.matrix_rank(sub) == r:
                self.bases.append((np.array(cells), np.linalg.pinv(sub)))
        self.h_q = float(entropy_arr(q))

    def min_entropy(self, QY: np.ndarray):
        """(h_min(Q_Y) = min H(V|q) over qV = Q_Y, index of the best basis)."""
        QY = np.atleast_2d(QY)
        b = np.hstack([np.broadcast_to(self.q, (len(QY), self.q.size)), QY])
        best = np.full(len(QY), np.inf)
        arg = np.full(len(QY), -1)
        for k, (cells, pinv) in enumerate(self.bases):
            J = b @ pinv.T
            ok = J.min(axis=1) >= -1e-12
            H = entropy_arr(np.clip(J, 0, None))
            better = ok & (H < best)
            best[better] = H[better]
            arg[better] = k
        return best - self.h_q, arg

    def vertex(self, QY: np.ndarray, k: int) -> np.ndarray:
        cells, pinv = self.bases[k]
        b = np.concatenate([self.q, QY])
        J = np.zeros(self.q.size * self.ny)
        J[cells] = np.clip(pinv @ b, 0, None)
        return J.reshape(self.q.size, self.ny)


class InnerIn:
    """f(cap) = min over V with H(V|q) <= cap of D(qV||P_Y) + |I(q;V) - R|^+.

    Caches the Q_Y grid for one (q, W, P_Y, R) so repeated calls along an s
    search only redo the masked minimum and the local refinement.
    """

    def __init__(self, q, W, P_Y, R: float, resolution: int = 256):
        self.q_full = _vec(q)
        self.W = _mat(W)
        self.py = _vec(P_Y)
        self.R = float(R)
        self.rows = np.flatnonzero(self.q_full > 0)
        self.q = self.q_full[self.rows]
        ny = self.py.size
        self.ny = ny
        self.coupling = _CouplingTable(self.q, ny)
        if ny == 2:
            t = np.linspace(0.0, 1.0, 8 * resolution + 1)
            self.grid = np.stack([t, 1 - t], axis=1)
        else:
            total = resolution if ny == 3 else max(4, int(resolution ** (2 / (ny - 1))))
            self.grid = composition_lattice(total, ny) / total
        self.D = kl_arr(self.grid, self.py)
        self.H = entropy_arr(self.grid)
        self.hmin, _ = self.coupling.min_entropy(self.grid)
        self.h_w = float(self.q_full @ entropy_arr(self.W))

    def objective(self, QY: np.ndarray, cap: float) -> float:
        return float(kl_arr(QY, self.py) + max(entropy_arr(QY) - cap - self.R, 0.0))

    def _hmin(self, QY) -> float:
        return float(self.coupling.min_entropy(QY)[0][0])

    def _refine_binary(self, i: int, cap: float):
        ys = self.grid[:, 0]
        feas = lambda y: self._hmin(np.array([y, 1 - y])) <= cap + 1e-12
        phi = lambda y: self.objective(np.array([y, 1 - y]), cap)

        def edge(inside, outside):
            for _ in range(60):
                mid = 0.5 * (inside + outside)
                if feas(mid):
                    inside = mid
                else:
                    outside = mid
            return inside

        lo = ys[max(i - 1, 0)]
        hi = ys[min(i + 1, len(ys) - 1)]
        if not feas(lo):
            lo = edge(ys[i], lo)
        if not feas(hi):
            hi = edge(ys[i], hi)
        y, v, _ = golden_min(phi, lo, hi, tol=1e-12)
        return np.array([y, 1 - y]), v

    def _refine_simplex(self, QY: np.ndarray, cap: float):
        def pen(z):
            Q = np.exp(z - z.max())
            Q /= Q.sum()
            if self._hmin(Q) > cap + 1e-12:
                return math.inf
            return self.objective(Q, cap)

        z0 = np.log(np.clip(QY, 1e-12, None))
        res = minimize(pen, z0, method="Nelder-Mead",
                       options=dict(xatol=1e-10, fatol=1e-13, maxiter=4000))
        Q = np.exp(res.x - res.x.max())
        return Q / Q.sum(), float(res.fun)

    def solve(self, cap: float) -> tuple[float, np.ndarray]:
        """Return ``(f(cap), V)``."""
        mask = self.hmin <= cap + 1e-12
        vals = np.where(mask, self.D + np.maximum(self.H - cap - self.R, 0.0), np.inf)
        i = int(np.argmin(vals))
        best_q, best_v = self.grid[i], float(vals[i])
        if math.isinf(best_v):
            # always feasible in exact arithmetic (a point-mass Q_Y has h_min = 0)
            raise RuntimeError("no feasible output marginal on the grid")
        if self.ny == 2:
            Q, v = self._refine_binary(i, cap)
        else:
            Q, v = self._refine_simplex(best_q, cap)
        if v < best_v:
            best_q, best_v = Q, v
        return best_v, self.channel_for(best_q, cap)

    def channel_for(self, QY: np.ndarray, cap: float) -> np.ndarray:
        """A channel with output marginal Q_Y and entropy min(cap, H(Q_Y))."""
        h_ind = float(entropy_arr(QY))
        V_ind = np.tile(QY, (self.q.size, 1))
        if cap >= h_ind:
            V = V_ind
        else:
            _, k = self.coupling.min_entropy(QY)
            V_min = self.coupling.vertex(QY, int(k[0])) / self.q[:, None]
            h = lambda th: float(self.q @ entropy_arr((1 - th) * V_min + th * V_ind))
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if h(mid) <= cap:
                    lo = mid
                else:
                    hi = mid
            V = (1 - lo) * V_min + lo * V_ind
        full = np.tile(QY, (self.q_full.size, 1))
        full[self.rows] = V
        return full


def inner_objective(q, V, P_Y, R) -> float:
    """D(qV||P_Y) + |I(q;V) - R|^+ at a given channel."""
    q, V, py = _vec(q), np.asarray(V, dtype=float), _vec(P_Y)
    qy = q @ V
    I = float(entropy_arr(qy) - q @ entropy_arr(V))
    return float(kl_arr(qy, py) + max(I - R, 0.0))


def inner_min_in(q, W, P_Y, s: float, R: float, resolution: int = 256) -> tuple[float, Channel]:
    """min of D(qV||P_Y) + |I(q;V) - R|^+ over V with H(V|q) <= H(W|q) + s."""
    if s < 0:
        raise ValueError("entropy slack must be non-negative")
    inner = InnerIn(q, W, P_Y, R, resolution)
    v, V = inner.solve(inner.h_w + s)
    return v, Channel(V)


# ---------------------------------------------------------------------------

def balance_s(q, W, P_Y, R: float, tol: float = 1e-6, resolution: int = 256,
              check: bool = True) -> BalancedSolution:
    """Bisect the slack s in [0, log2|Y|] for the crossing of f and g.

    The returned value is max over s of min(f(s), g(s)). With ``check`` set a
    non-monotone trace raises :class:`MonotonicityError`.
    """
    q, W, py = _vec(q), _mat(W), _vec(P_Y)
    inner = InnerIn(q, W, py, R, resolution)
    trace = []
    cache = {}

    def fg(s):
        if s not in cache:
            fv, Vin = inner.solve(inner.h_w + s)
            gv, Vout = _min_out(q, W, s)
            cache[s] = (fv, gv, Vin, Vout)
            trace.append((s, fv, gv))
        return cache[s]

    f0, g0, Vin0, Vout0 = fg(0.0)
    if f0 <= 1e-12:
        return BalancedSolution(Pmf(q), 0.0, 0.0, f0, g0, Channel(Vin0), Vout0, trace)

    lo, hi = 0.0, float(np.log2(py.size))
    fg(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm, gm, *_ = fg(mid)
        if fm > gm:
            lo = mid
        else:
            hi = mid

    f_lo, g_lo, Vin_lo, Vout_lo = fg(lo)
    f_hi, g_hi, Vin_hi, Vout_hi = fg(hi)
    m_lo, m_hi = min(f_lo, g_lo), min(f_hi, g_hi)
    if m_lo >= m_hi:
        s_star, value, fs, gs, Vin, Vout = lo, m_lo, f_lo, g_lo, Vin_lo, Vout_lo
    else:
        s_star, value, fs, gs, Vin, Vout = hi, m_hi, f_hi, g_hi, Vin_hi, Vout_hi

    finite_g = [t for t in (g_lo, g_hi) if math.isfinite(t)]
    slope = (abs(f_hi - f_lo) + (abs(finite_g[-1] - finite_g[0]) if finite_g else 0.0)) / max(hi - lo, 1e-300)
    sol = BalancedSolution(Pmf(q), s_star, float(value), fs, gs, Channel(Vin), Vout, trace,
                           slope_bound=slope, plateau_width=hi - lo)
    if check and not sol.monotone:
        raise MonotonicityError(f"non-monotone f/g trace at q={q}, R={R}")
    return sol


def ec_at(q, W, P_Y, R, tol=1e-6, resolution=256) -> float:
    return balance_s(q, W, P_Y, R, tol, resolution).value


def _minimize_simplex(obj, nx: int, resolution: int):
    """Lattice scan of the simplex followed by local refinement."""
    if nx == 1:
        return np.ones(1), obj(np.ones(1)), 1
    lattice = composition_lattice(resolution, nx) / resolution
    vals = np.array([obj(p) for p in lattice])
    evals = len(lattice)
    i = int(np.argmin(vals))
    best_p, best_v = lattice[i], float(vals[i])
    if nx == 2:
        step = 1.0 / resolution
        lo, hi = max(best_p[0] - step, 0.0), min(best_p[0] + step, 1.0)
        x, v, n = golden_min(lambda t: obj(np.array([t, 1 - t])), lo, hi, tol=1e-6)
        evals += n
        if v < best_v:
            best_p, best_v = np.array([x, 1 - x]), v
        return best_p, best_v, evals
    step = 1.0 / resolution
    while step >= 1e-4:
        improved = False
        for a, b in itertools.permutations(range(nx), 2):
            if best_p[a] < step:
                continue
            cand = best_p.copy()
            cand[a] -= step
            cand[b] += step
            v = obj(cand)
            evals += 1
            if v < best_v:
                best_p, best_v, improved = cand, v, True
        if not improved:
            step /= 2
    return best_p, best_v, evals


def ec_curve(instance: ConverseInstance, rates=None) -> ExponentCurve:
    """E_c on a rate grid: outer minimum over the whole input simplex."""
    W, py = instance.channel, instance.target
    rates = np.atleast_1d(np.asarray(instance.rate if rates is None else rates, dtype=float))
    values, s_stars, argmins, diags = [], [], [], []
    for R in rates:
        obj = lambda q: balance_s(q, W, py, R, instance.s_tolerance, instance.v_resolution).value
        q, v, evals = _minimize_simplex(obj, W.shape[0], instance.qx_resolution)
        sol = balance_s(q, W, py, R, instance.s_tolerance, instance.v_resolution)
        values.append(sol.value)
        s_stars.append(sol.s_star)
        argmins.append(q)
        diags.append(dict(evaluations=evals, inner_in=sol.inner_in_value,
                          inner_out=sol.inner_out_value, plateau_width=sol.plateau_width,
                          trace_points=len(sol.trace)))
    curve = ExponentCurve("converse", rates, np.array(values), np.array(s_stars), argmins, diags)
    if curve.monotonicity_violation() > 1e-9:
        log.warning("E_c curve increases by %.3g somewhere", curve.monotonicity_violation())
    return curve
