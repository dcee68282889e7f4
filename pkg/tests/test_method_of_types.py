import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from softcover import method_of_types as mot
from softcover.achievability import ea_renyi
from softcover.prob import bsc

BSC01 = bsc(0.1).rows
PX = np.array([0.48, 0.52])
PY = np.array([0.484, 0.516])


class TestEnumeration:
    @pytest.mark.parametrize("n,k,count", [(6, 3, 28), (3, 3, 10), (4, 2, 5), (1, 5, 5), (10, 4, 286)])
    def test_counts(self, n, k, count):
        assert mot.count_types(n, k) == count
        types = list(mot.enumerate_types(n, k))
        assert len(types) == count
        assert len({t.counts for t in types}) == count
        assert all(t.n == n for t in types)

    def test_order_is_reproducible(self):
        assert [t.counts for t in mot.enumerate_types(4, 3)] == [t.counts for t in mot.enumerate_types(4, 3)]

    def test_budget(self):
        with pytest.raises(mot.BudgetExceeded):
            list(mot.enumerate_types(50, 6, budget=1000))

    def test_invalid_histogram(self):
        with pytest.raises(ValueError):
            mot.TypeHistogram((0, 0))
        with pytest.raises(ValueError):
            mot.TypeHistogram((2, -1))


class TestClassSize:
    def test_multinomial(self):
        assert mot.type_class_size(mot.TypeHistogram((2, 1, 1))) == 12

    def test_matches_brute_force(self):
        for counts in [(3, 2), (2, 2, 1), (4, 0, 1)]:
            n, k = sum(counts), len(counts)
            brute = sum(1 for s in itertools.product(range(k), repeat=n)
                        if tuple(s.count(a) for a in range(k)) == counts)
            assert mot.type_class_size(mot.TypeHistogram(counts)) == brute

    def test_log_size_large_n(self):
        t = mot.TypeHistogram((40, 30, 30))
        exact = math.log2(math.factorial(100) // (math.factorial(40) * math.factorial(30) ** 2))
        assert mot.log2_type_class_size(t) == pytest.approx(exact, abs=1e-9)

    def test_probabilities_partition(self):
        p = [Fraction(1, 5), Fraction(4, 5)]
        total = sum(mot.type_class_size(t) * p[0] ** t.counts[0] * p[1] ** t.counts[1]
                    for t in mot.enumerate_types(9, 2))
        assert total == 1


class TestFiniteAchievability:
    @pytest.mark.parametrize("R", [0.0, 0.25, 0.5])
    def test_single_letter(self, R):
        # joint 1-types are point masses on (x, y)
        J = PX[:, None] * BSC01
        ref = min(-math.log2(J[x, y]) + max(-math.log2(PX[x]) - R, 0.0)
                  for x in range(2) for y in range(2))
        assert mot.ea_finite(1, PX, BSC01, R) == pytest.approx(ref, abs=1e-12)

    def test_nested_lattices_non_increasing(self):
        vals = [mot.ea_finite(n, PX, BSC01, 0.25) for n in (5, 10, 20)]
        assert vals[0] >= vals[1] >= vals[2]

    def test_above_asymptotic_value(self):
        v = mot.ea_finite(20, PX, BSC01, 0.25)
        assert v >= ea_renyi(PX, BSC01, 0.25).value - 1e-9

    def test_zero_probability_cells_skipped(self):
        W = np.array([[1.0, 0.0], [0.5, 0.5]])
        assert math.isfinite(mot.ea_finite(4, [0.5, 0.5], W, 0.1))


class TestFiniteConverse:
    @pytest.mark.parametrize("R", [0.0, 0.25, 0.5])
    def test_single_letter(self, R):
        # deterministic channels only, so f is the cheapest point-mass output
        assert mot.ec_finite(1, BSC01, PY, R) == pytest.approx(-math.log2(0.516), abs=1e-12)
        assert mot.ec_finite(1, BSC01, PY, R) == pytest.approx(0.954557, abs=1e-6)

    def test_conditional_type_count(self):
        V = mot._conditional_types((2, 1), 2)
        assert V.shape == (3 * 2, 2, 2)

    def test_budget(self):
        with pytest.raises(mot.BudgetExceeded):
            mot.ec_finite(30, np.full((3, 3), 1 / 3), [1 / 3] * 3, 0.1, budget=1000)


class TestCodewordWeights:
    def _brute_p(self, N, px):
        """P_X^n of the x-strings whose joint type with a fixed y-string is N."""
        nx, ny = N.shape
        y = [b for b in range(ny) for _ in range(N[:, b].sum())]
        total = Fraction(0)
        for x in itertools.product(range(nx), repeat=len(y)):
            counts = np.zeros_like(N)
            for a, b in zip(x, y):
                counts[a, b] += 1
            if np.array_equal(counts, N):
                term = Fraction(1)
                for a in x:
                    term *= px[a]
                total += term
        return total

    @pytest.mark.parametrize("counts", [((1, 1), (0, 2)), ((2, 0), (1, 1)), ((0, 1), (3, 0))])
    def test_p_exact(self, counts):
        px = [Fraction(12, 25), Fraction(13, 25)]
        joint = mot.ConditionalTypeTable(counts)
        _, p = mot.codeword_weights(joint, BSC01, PX)
        assert p == pytest.approx(float(self._brute_p(joint.array(), px)), rel=1e-12)
        assert p >= mot.p_lower_bound(joint, PX)

    def test_w_value(self):
        joint = mot.ConditionalTypeTable(((1, 1), (0, 2)))
        w, _ = mot.codeword_weights(joint, BSC01, PX)
        assert w == pytest.approx(0.9 * 0.1 * 0.9**2, rel=1e-12)

    def test_w_zero_off_support(self):
        joint = mot.ConditionalTypeTable(((1, 1),))
        w, _ = mot.codeword_weights(joint, [[1.0, 0.0]], [1.0])
        assert w == 0.0
