"""Exact total variation of covering codes and random-code Monte Carlo.

Random streams come from the Philox4x64 counter-based generator keyed by
``(seed, n, trial)``, so every trial is reproducible on its own and results
do not depend on the order trials run in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .method_of_types import TypeHistogram
from .prob import _mat, _vec

MAX_OUTPUTS = 2**22


class StateSpaceTooLarge(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Code:
    codewords: np.ndarray  # (M, n) integer symbols

    def __post_init__(self):
        cw = np.atleast_2d(np.asarray(self.codewords, dtype=np.int64))
        if cw.shape[0] < 1 or cw.shape[1] < 1 or cw.min() < 0:
            raise ValueError("code needs at least one codeword of positive length")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


@dataclass
class SimReport:
    """Exact tv of ``trials`` random codes at one blocklength.

    ``tv`` and ``exponent_estimate`` summarize the trial mean of 1 - tv;
    the per-code values are kept in ``per_code_tv``.
    """

    n: int
    M: int
    rate: float
    tv: float
    exponent_estimate: float
    seed: int
    trials: int
    per_code_tv: list[float] = field(default_factory=list)

    @property
    def mean_overlap(self) -> float:
        return 1.0 - self.tv

    @property
    def per_code_exponents(self) -> list[float]:
        return [exponent_estimate(t, self.n) for t in self.per_code_tv]


def exponent_estimate(tv: float, n: int) -> float:
    """-(1/n) log2(1 - tv); +inf when tv == 1."""
    return math.inf if tv >= 1.0 else -math.log2(1.0 - tv) / n


def _log_product_table(logs: np.ndarray) -> np.ndarray:
    """Sum of ``logs[t][y_t]`` for every output string, last position fastest."""
    out = np.zeros(1)
    for row in logs:
        out = (out[:, None] + row[None, :]).ravel()
    return out


def induced_output_tv(code: Code, W, P_Y) -> float:
    """Exact 1/2 || P~_{Y^n|C} - P_Y^n ||_1 by enumerating every y^n.

    Computed as 1 - sum_y min(P~, P^n), which keeps precision when the
    overlap is small.
    """
    return 1.0 - induced_output_overlap(code, W, P_Y)


def induced_output_overlap(code: Code, W, P_Y) -> float:
    W, py = _mat(W), _vec(P_Y)
    ny = W.shape[1]
    if code.codewords.max() >= W.shape[0]:
        raise ValueError("codeword symbol outside the input alphabet")
    if ny**code.n > MAX_OUTPUTS:
        raise StateSpaceTooLarge(f"|Y|^n = {ny}^{code.n} exceeds 2^22; reduce n")
    with np.errstate(divide="ignore"):
        logW = np.log(W)
        logP = _log_product_table(np.tile(np.log(py), (code.n, 1)))
    induced = np.full_like(logP, -np.inf)
    for cw in code.codewords:
        induced = np.logaddexp(induced, _log_product_table(logW[cw]))
    induced -= math.log(code.M)
    overlap = float(np.exp(logsumexp(np.minimum(induced, logP))))
    return min(max(overlap, 0.0), 1.0)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def sample_code(source, n: int, M: int, seed: int, stream: tuple[int, ...] = ()) -> Code:
    """Draw M codewords i.i.d. from a pmf, or uniformly from a type class.

    ``source`` is a probability vector (per-symbol i.i.d.) or a
    :class:`TypeHistogram` whose ``n`` must match.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    rng = _rng(seed, *stream)
    if isinstance(source, TypeHistogram):
        if source.n != n:
            raise ValueError("type histogram blocklength differs from n")
        base = np.repeat(np.arange(len(source.counts)), source.counts)
        cw = np.array([rng.permutation(base) for _ in range(M)])
    else:
        p = _vec(source)
        cw = rng.choice(p.size, size=(M, n), p=p)
    return Code(cw)


def empirical_exponent(W, P_Y, p, R: float, n_list, trials: int, seed: int) -> list[SimReport]:
    """Random codes of size round(2^{nR}) drawn i.i.d. from ``p``; exact tv each."""
    reports = []
    for n in n_list:
        M = max(1, round(2.0 ** (n * R)))
        tvs = [induced_output_tv(sample_code(p, n, M, seed, (n, t)), W, P_Y) for t in range(trials)]
        mean_tv = float(np.mean(tvs))
        reports.append(SimReport(n, M, R, mean_tv, exponent_estimate(mean_tv, n), seed, trials, tvs))
    return reports


def binomial_bound_check(M: int, p: float) -> tuple[float, float, bool]:
    """Exact 1/2 E|K/M - p| for K ~ Binomial(M, p) against p - p min(Mp, 1)/2."""
    if M < 2:
        raise ValueError("the bound needs M >= 2")
    k = np.arange(M + 1)
    lhs = 0.5 * float(np.sum(binom.pmf(k, M, p) * np.abs(k / M - p)))
    rhs = p - 0.5 * p * min(M * p, 1.0)
    return lhs, rhs, lhs <= rhs + 1e-12


def binomial_bound_sweep(M_values, p_values) -> np.ndarray:
    """rhs - lhs for every (M, p) pair, vectorized over p."""
    p = np.asarray(p_values, dtype=float)
    out = np.empty((len(M_values), p.size))
    for i, M in enumerate(M_values):
        k = np.arange(M + 1)[:, None]
        lhs = 0.5 * np.sum(binom.pmf(k, M, p[None, :]) * np.abs(k / M - p[None, :]), axis=0)
        rhs = p - 0.5 * p * np.minimum(M * p, 1.0)
        out[i] = rhs - lhs
    return out
