import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from softcover import simulation as sim
from softcover.method_of_types import TypeHistogram
from softcover.prob import bsc

BSC01 = bsc(0.1).rows
PY = np.array([0.484, 0.516])


def exact_tv(codewords, W, py):
    """Total variation in rational arithmetic, enumerating every output string."""
    n = len(codewords[0])
    tv = Fraction(0)
    for y in itertools.product(range(len(py)), repeat=n):
        target = Fraction(1)
        for b in y:
            target *= py[b]
        induced = Fraction(0)
        for cw in codewords:
            term = Fraction(1)
            for a, b in zip(cw, y):
                term *= W[a][b]
            induced += term
        induced /= len(codewords)
        tv += abs(induced - target)
    return tv / 2


W_FRAC = [[Fraction(9, 10), Fraction(1, 10)], [Fraction(1, 10), Fraction(9, 10)]]
PY_FRAC = [Fraction(484, 1000), Fraction(516, 1000)]


class TestTotalVariation:
    def test_single_letter(self):
        assert sim.induced_output_tv(sim.Code([[0]]), BSC01, PY) == pytest.approx(0.416, abs=1e-12)

    @pytest.mark.parametrize("codewords", [[[0, 1], [1, 1]], [[0, 0], [1, 1]], [[1, 0, 1]],
                                           [[0, 0, 1], [1, 1, 0], [0, 1, 1]]])
    def test_matches_rational(self, codewords):
        ref = float(exact_tv(codewords, W_FRAC, PY_FRAC))
        assert sim.induced_output_tv(sim.Code(codewords), BSC01, PY) == pytest.approx(ref, abs=1e-12)

    def test_small_overlap_keeps_precision(self):
        # overlap ~1e-20, far below the resolution of 1 - tv in doubles
        W = np.array([[0.999, 0.001], [0.001, 0.999]])
        overlap = sim.induced_output_overlap(sim.Code([[0] * 16]), W, [0.001, 0.999])
        ref = sum(math.comb(16, k) * 0.001 ** max(k, 16 - k) * 0.999 ** min(k, 16 - k)
                  for k in range(17))
        assert overlap == pytest.approx(ref, rel=1e-9)

    def test_state_space_guard(self):
        with pytest.raises(sim.StateSpaceTooLarge):
            sim.induced_output_tv(sim.Code([[0] * 23]), BSC01, PY)

    def test_bad_symbol(self):
        with pytest.raises(ValueError):
            sim.induced_output_tv(sim.Code([[0, 2]]), BSC01, PY)

    def test_exponent_estimate(self):
        assert sim.exponent_estimate(0.75, 2) == pytest.approx(1.0)
        assert sim.exponent_estimate(1.0, 5) == float("inf")


class TestSampling:
    def test_reproducible(self):
        a = sim.sample_code([0.3, 0.7], 8, 5, seed=1, stream=(8, 0))
        b = sim.sample_code([0.3, 0.7], 8, 5, seed=1, stream=(8, 0))
        c = sim.sample_code([0.3, 0.7], 8, 5, seed=1, stream=(8, 1))
        assert np.array_equal(a.codewords, b.codewords)
        assert not np.array_equal(a.codewords, c.codewords)

    def test_symbol_frequency(self):
        code = sim.sample_code([0.3, 0.7], 100, 100, seed=2)
        freq = float(np.mean(code.codewords == 0))
        sigma = np.sqrt(0.3 * 0.7 / 10_000)
        assert abs(freq - 0.3) <= 3 * sigma

    def test_type_class_source(self):
        t = TypeHistogram((3, 5))
        code = sim.sample_code(t, 8, 20, seed=3)
        assert np.all((code.codewords == 0).sum(axis=1) == 3)

    def test_type_class_length_mismatch(self):
        with pytest.raises(ValueError):
            sim.sample_code(TypeHistogram((3, 5)), 9, 2, seed=0)

    def test_code_validation(self):
        with pytest.raises(ValueError):
            sim.Code([[-1, 0]])


class TestEmpiricalExponent:
    def test_report_shape(self):
        reps = sim.empirical_exponent(BSC01, PY, [0.48, 0.52], 0.25, [4, 8], trials=3, seed=9)
        assert [r.n for r in reps] == [4, 8]
        assert [r.M for r in reps] == [2, 4]
        for r in reps:
            assert len(r.per_code_tv) == 3
            assert r.tv == pytest.approx(np.mean(r.per_code_tv))
            assert r.mean_overlap == pytest.approx(1 - r.tv)

    def test_reproducible(self):
        a = sim.empirical_exponent(BSC01, PY, [0.48, 0.52], 0.25, [6], trials=4, seed=5)
        b = sim.empirical_exponent(BSC01, PY, [0.48, 0.52], 0.25, [6], trials=4, seed=5)
        assert a[0].per_code_tv == b[0].per_code_tv


class TestBinomialBound:
    def test_hand_value_half(self):
        lhs, rhs, ok = sim.binomial_bound_check(2, 0.5)
        assert lhs == pytest.approx(0.125, abs=1e-15)
        assert rhs == pytest.approx(0.25, abs=1e-15)
        assert ok

    def test_hand_value_high_p(self):
        # exact: 1/2 E|K/4 - 0.9| with K ~ Bin(4, 0.9)
        p = Fraction(9, 10)
        ref = Fraction(1, 2) * sum(math.comb(4, k) * p**k * (1 - p) ** (4 - k) * abs(Fraction(k, 4) - p)
                                   for k in range(5))
        lhs, rhs, ok = sim.binomial_bound_check(4, 0.9)
        assert lhs == pytest.approx(float(ref), abs=1e-15)
        assert lhs == pytest.approx(0.06561, abs=1e-12)
        assert rhs == pytest.approx(0.45, abs=1e-15)
        assert ok

    def test_rejects_single_draw(self):
        with pytest.raises(ValueError):
            sim.binomial_bound_check(1, 0.5)

    def test_sweep_agrees_with_scalar(self):
        margins = sim.binomial_bound_sweep([2, 7], [0.1, 0.5, 0.9])
        for i, M in enumerate([2, 7]):
            for j, p in enumerate([0.1, 0.5, 0.9]):
                lhs, rhs, _ = sim.binomial_bound_check(M, p)
                assert margins[i, j] == pytest.approx(rhs - lhs, abs=1e-15)
