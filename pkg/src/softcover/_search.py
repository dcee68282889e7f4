"""Scalar search helpers shared by the solvers."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-7,
               max_iter: int = 200) -> tuple[float, float, int]:
    """Golden-section search for the maximum of a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x), evaluations)``. Endpoints are compared at the end so a
    maximum sitting on the boundary is not lost.
    """
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while b - a > tol and evals < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        evals += 1
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    for x in (lo, hi):
        fx = f(x)
        evals += 1
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f, evals


def golden_min(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-7,
               max_iter: int = 200) -> tuple[float, float, int]:
    x, fx, n = golden_max(lambda t: -f(t), lo, hi, tol, max_iter)
    return x, -fx, n
