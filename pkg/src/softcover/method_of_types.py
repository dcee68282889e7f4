"""n-types, type classes and the finite-blocklength exponent forms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .prob import _mat, _vec, entropy_arr, kl_arr

BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TypeHistogram:
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts) or sum(counts) == 0:
            raise ValueError(f"invalid type counts {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def pmf(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n


@dataclass(frozen=True)
class ConditionalTypeTable:
    """Joint counts over X x Y; row sums give the base type over X."""

    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(tuple(int(c) for c in row) for row in self.counts))

    @property
    def base(self) -> TypeHistogram:
        return TypeHistogram(tuple(sum(row) for row in self.counts))

    @property
    def n(self) -> int:
        return sum(map(sum, self.counts))

    def array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


def count_types(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(k))


def enumerate_types(n: int, k: int, budget: int = BUDGET) -> Iterator[TypeHistogram]:
    """Every n-type over a k-letter alphabet, exactly once."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if count_types(n, k) > budget:
        raise BudgetExceeded(f"{count_types(n, k)} types exceed budget {budget}")
    for c in _compositions(n, k):
        yield TypeHistogram(c)


def _type_array(n: int, k: int, budget: int = BUDGET) -> np.ndarray:
    if count_types(n, k) > budget:
        raise BudgetExceeded(f"{count_types(n, k)} types exceed budget {budget}")
    return np.array(list(_compositions(n, k)), dtype=np.int64).reshape(-1, k)


def type_class_size(t: TypeHistogram) -> int:
    """|T_Q| = n! / prod(counts!), exact."""
    out = math.factorial(t.n)
    for c in t.counts:
        out //= math.factorial(c)
    return out


def log2_type_class_size(t: TypeHistogram) -> float:
    if t.n <= 64:
        return math.log2(type_class_size(t))
    return (math.lgamma(t.n + 1) - sum(math.lgamma(c + 1) for c in t.counts)) / math.log(2)


# ---------------------------------------------------------------------------

def ea_finite(n: int, p, W, R: float, budget: int = BUDGET) -> float:
    """min over joint n-types Q of D(Q||P_XY) + |D(Q||P_X Q_Y) - R|^+."""
    p, W = _vec(p), _mat(W)
    nx, ny = W.shape
    P = (p[:, None] * W).ravel()
    Q = _type_array(n, nx * ny, budget) / n
    Q = Q[np.all((Q == 0) | (P > 0), axis=1)]  # skip types off supp(P_XY)
    d1 = kl_arr(Q, P)
    qy = Q.reshape(-1, nx, ny).sum(axis=1)
    ref = (p[None, :, None] * qy[:, None, :]).reshape(-1, nx * ny)
    d2 = kl_arr(Q, ref)
    return float(np.min(d1 + np.maximum(d2 - R, 0.0)))


def _conditional_types(base: tuple[int, ...], ny: int) -> np.ndarray:
    """All conditional types given the x-counts ``base`` as V arrays (k, nx, ny)."""
    per_row = []
    for c in base:
        if c == 0:
            per_row.append(np.full((1, ny), 1.0 / ny))  # row never used
        else:
            per_row.append(_type_array(c, ny) / c)
    idx = itertools.product(*(range(len(r)) for r in per_row))
    return np.array([[per_row[x][i] for x, i in enumerate(combo)] for combo in idx])


def balance_finite(q: np.ndarray, V: np.ndarray, W: np.ndarray, py: np.ndarray, R: float) -> float:
    """max over s >= 0 of min(f_n(s), g_n(s)) on a finite family of channels.

    f_n is the smallest in-set objective among members with entropy at most
    H(W|q) + s, g_n the smallest D(V||W|q) among members above it; both are
    step functions, so only the gaps between distinct entropies matter.
    """
    rows = q > 0
    qr = q[rows]
    Vr = V[:, rows, :]
    h = entropy_arr(Vr) @ qr
    qy = np.einsum("x,kxy->ky", qr, Vr)
    I = entropy_arr(qy) - h
    F = kl_arr(qy, py) + np.maximum(I - R, 0.0)
    D = kl_arr(Vr, W[rows]) @ qr
    hw = float(qr @ entropy_arr(W[rows]))
    s_max = float(np.log2(py.size))

    order = np.argsort(h, kind="stable")
    h, F, D = h[order], F[order], D[order]
    levels, starts = np.unique(np.round(h, 12), return_index=True)
    prefix_f = np.minimum.accumulate(F)
    suffix_d = np.minimum.accumulate(D[::-1])[::-1]

    # candidate caps: H(W|q) itself and every entropy level in [hw, hw + s_max]
    caps = [hw] + [lv for lv in levels if hw < lv <= hw + s_max]
    best = 0.0
    for cap in caps:
        k = int(np.searchsorted(h, cap + 1e-12, side="right"))  # members with H <= cap
        f = prefix_f[k - 1] if k > 0 else math.inf
        g = suffix_d[k] if k < len(h) else math.inf
        best = max(best, min(f, g))
    return float(best)


def ec_finite(n: int, W, P_Y, R: float, budget: int = BUDGET) -> float:
    """min over n-types Q_X of the balanced value on conditional n-types."""
    W, py = _mat(W), _vec(P_Y)
    nx, ny = W.shape
    total = 0
    for t in enumerate_types(n, nx, budget):
        total += math.prod(count_types(c, ny) for c in t.counts if c)
    if total > budget:
        raise BudgetExceeded(f"{total} conditional types exceed budget {budget}")
    best = math.inf
    for t in enumerate_types(n, nx, budget):
        V = _conditional_types(t.counts, ny)
        best = min(best, balance_finite(t.pmf, V, W, py, R))
    return best


def codeword_weights(joint: ConditionalTypeTable, W, P_X) -> tuple[float, float]:
    """(w, p) for a joint type: w = W^n(y^n|x^n) on the joint class, and
    p = P_X^n(X^n in T_Vbar(y^n)) for any y^n of the output type.

    p is exact: the conditional class of x^n given y^n has
    prod_y (N_y! / prod_x N_xy!) members, each of probability prod_x P_X(x)^N_x.
    """
    W, px = _mat(W), _vec(P_X)
    N = joint.array()
    n = joint.n
    with np.errstate(divide="ignore"):
        logw = np.where(N > 0, N * np.log2(W), 0.0).sum()
        logpx = np.where(N.sum(axis=1) > 0, N.sum(axis=1) * np.log2(px), 0.0).sum()
    w = float(2.0**logw) if np.isfinite(logw) else 0.0
    size = 1
    for col in N.T:
        size *= math.factorial(int(col.sum()))
        for c in col:
            size //= math.factorial(int(c))
    p = float(size * 2.0**logpx) if np.isfinite(logpx) else 0.0
    return w, p


def p_lower_bound(joint: ConditionalTypeTable, P_X) -> float:
    """(n+1)^{-|X||Y|} 2^{-n D(Q_XY||P_X Q_Y)}, the bound p is checked against."""
    px = _vec(P_X)
    N = joint.array()
    n = joint.n
    Q = N / n
    ref = px[:, None] * Q.sum(axis=0)[None, :]
    d = float(kl_arr(Q.ravel(), ref.ravel()))
    return float((n + 1) ** (-N.size) * 2.0 ** (-n * d))
