"""Finite-alphabet distributions and information measures (all in bits)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

LN2 = np.log(2.0)
SUM_TOL = 1e-12


class InvalidDistribution(ValueError):
    pass


def _check_pmf(probs: np.ndarray, tol: float = SUM_TOL) -> None:
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidDistribution(f"pmf must be a non-empty vector, got shape {probs.shape}")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise InvalidDistribution(f"pmf has negative or non-finite entries: {probs}")
    if abs(probs.sum() - 1.0) > tol:
        raise InvalidDistribution(f"pmf sums to {probs.sum():.15g}, not 1")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        _check_pmf(p)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        return f"Pmf({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; ``rows[x, y] = V(y | x)``.

    Rows may be ``nan`` when the conditioning symbol has zero probability
    (backward channels); such rows are absent and never read.
    """

    rows: np.ndarray

    def __post_init__(self):
        r = np.array(self.rows, dtype=float)
        if r.ndim != 2 or r.size == 0:
            raise InvalidDistribution(f"channel must be a non-empty matrix, got shape {r.shape}")
        for x, row in enumerate(r):
            if np.all(np.isnan(row)):
                continue
            try:
                _check_pmf(row, tol=1e-9)
            except InvalidDistribution as exc:
                raise InvalidDistribution(f"row {x}: {exc}") from None
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @property
    def in_size(self) -> int:
        return self.rows.shape[0]

    @property
    def out_size(self) -> int:
        return self.rows.shape[1]

    @property
    def absent_rows(self) -> np.ndarray:
        return np.all(np.isnan(self.rows), axis=1)

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)

    def __repr__(self):
        return f"Channel({np.array2string(self.rows, precision=6)})"


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint distribution over X x Y, ``table[x, y]``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2:
            raise InvalidDistribution("joint table must be a matrix")
        _check_pmf(t.ravel())
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def marginal_x(self) -> Pmf:
        return Pmf(self.table.sum(axis=1))

    @property
    def marginal_y(self) -> Pmf:
        return Pmf(self.table.sum(axis=0))

    def __array__(self, dtype=None, copy=None):
        return self.table if dtype is None else self.table.astype(dtype)


def bsc(crossover: float) -> Channel:
    return Channel([[1 - crossover, crossover], [crossover, 1 - crossover]])


def _vec(p) -> np.ndarray:
    if isinstance(p, Pmf):
        return p.probs
    p = np.asarray(p, dtype=float)
    _check_pmf(p, tol=1e-9)
    return p


def _mat(V) -> np.ndarray:
    if isinstance(V, Channel):
        return V.rows
    return Channel(V).rows


def _tab(J) -> np.ndarray:
    if isinstance(J, JointPmf):
        return J.table
    return JointPmf(J).table


# Array kernels. These skip validation and are what the solvers call.

def entropy_arr(p: np.ndarray, axis: int = -1) -> np.ndarray:
    return -xlogy(p, p).sum(axis=axis) / LN2


def kl_arr(p: np.ndarray, q: np.ndarray, axis: int = -1) -> np.ndarray:
    """Elementwise-broadcast KL in bits; ``inf`` off the support of q."""
    p, q = np.broadcast_arrays(p, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * (np.log(p) - np.log(q)), 0.0)
    return terms.sum(axis=axis) / LN2


def mutual_info_arr(q: np.ndarray, V: np.ndarray) -> float:
    qy = q @ V
    return float(entropy_arr(qy) - q @ entropy_arr(V))


# Public, validated surface.

def entropy(p) -> float:
    return float(entropy_arr(_vec(p)))


def cond_entropy(V, q) -> float:
    V, q = _mat(V), _vec(q)
    if V.shape[0] != q.size:
        raise ValueError(f"channel has {V.shape[0]} inputs, pmf has {q.size} symbols")
    return float(q @ entropy_arr(V))


def kl(p, q) -> float:
    """D(p || q) in bits. Returns ``inf`` when supp(p) is not inside supp(q)."""
    p, q = _vec(p), _vec(q)
    if p.size != q.size:
        raise ValueError("kl arguments live on different alphabets")
    return float(kl_arr(p, q))


def cond_kl(V, W, q) -> float:
    V, W, q = _mat(V), _mat(W), _vec(q)
    if V.shape != W.shape or V.shape[0] != q.size:
        raise ValueError("shape mismatch in cond_kl")
    rows = q > 0
    return float(q[rows] @ kl_arr(V[rows], W[rows]))


def push_forward(q, V) -> Pmf:
    V, q = _mat(V), _vec(q)
    if V.shape[0] != q.size:
        raise ValueError(f"channel has {V.shape[0]} inputs, pmf has {q.size} symbols")
    out = q @ V
    return Pmf(out / out.sum())


def mutual_info(q, V) -> float:
    return mutual_info_arr(_vec(q), _mat(V))


def joint_of(q, V) -> JointPmf:
    V, q = _mat(V), _vec(q)
    if V.shape[0] != q.size:
        raise ValueError("shape mismatch in joint_of")
    return JointPmf(q[:, None] * V)


def backward_of(J) -> tuple[Pmf, Channel]:
    """Split a joint into its y-marginal and the backward channel X|Y.

    The backward channel has one row per output symbol; rows for outputs of
    zero probability are ``nan``.
    """
    t = _tab(J)
    py = t.sum(axis=0)
    back = np.full((t.shape[1], t.shape[0]), np.nan)
    live = py > 0
    back[live] = (t[:, live] / py[live]).T
    return Pmf(py), Channel(back)


def info_density(J) -> np.ndarray:
    """log2 J(x,y) / (J(x) J(y)) as a table; ``nan`` off the support."""
    t = _tab(J)
    px, py = t.sum(axis=1), t.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        iota = np.log2(t) - np.log2(px)[:, None] - np.log2(py)[None, :]
    iota[t <= 0] = np.nan
    return iota


def renyi_mi(alpha: float, p, W) -> float:
    """Order-``alpha`` Rényi mutual information I_alpha(p, W) in bits.

    Evaluated through the backward channel and the information density,
    with both sums in the log domain. ``alpha == 1`` returns I(p; W).
    """
    if alpha <= 0:
        raise ValueError(f"Rényi order must be positive, got {alpha}")
    p, W = _vec(p), _mat(W)
    if alpha == 1.0:
        return mutual_info_arr(p, W)
    return renyi_mi_arr(alpha, p, W)


def renyi_mi_arr(alpha: float, p: np.ndarray, W: np.ndarray) -> float:
    J = p[:, None] * W
    py = J.sum(axis=0)
    live = J > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_j = np.log(J)
        log_px = np.log(p)[:, None]
        log_py = np.log(py)[None, :]
        # ln of backward(x|y) * 2^{(alpha-1) iota}, natural-log domain
        log_back = log_j - log_py
        iota_nat = log_j - log_px - log_py
        terms = np.where(live, log_back + (alpha - 1.0) * iota_nat, -np.inf)
    inner = logsumexp(terms, axis=0)  # ln E_back[...] per y
    cols = py > 0
    outer = logsumexp(np.log(py[cols]) + inner[cols] / alpha)
    return float(alpha / (alpha - 1.0) * outer / LN2)


def sibson_mi_arr(alpha: float, p: np.ndarray, W: np.ndarray) -> float:
    """Closed form alpha/(alpha-1) log2 sum_y (sum_x p W^alpha)^(1/alpha).

    Algebraically identical to :func:`renyi_mi` away from alpha = 1; kept as
    an independent evaluation route for tests.
    """
    with np.errstate(divide="ignore"):
        s = (p[:, None] * W**alpha).sum(axis=0)
        return float(alpha / (alpha - 1.0) * np.log2(np.sum(s ** (1.0 / alpha))))
