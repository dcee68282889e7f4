import numpy as np
import pytest

from softcover._search import golden_min
from softcover.feasible import Infeasible, build, minimize_over
from softcover.prob import bsc


def test_invertible_channel_is_singleton():
    poly = build(bsc(0.1), [0.484, 0.516])
    np.testing.assert_allclose(poly.anchor, [0.48, 0.52], atol=1e-12)
    assert poly.dim == 0
    assert poly.is_singleton


def test_useless_channel_whole_simplex():
    r = [0.3, 0.7]
    poly = build([r, r, r], r)
    assert poly.dim == 2
    assert poly.residual(poly.anchor) <= 1e-9


def test_identity_channel():
    poly = build(np.eye(2), [0.3, 0.7])
    np.testing.assert_allclose(poly.anchor, [0.3, 0.7])
    assert poly.dim == 0


def test_unreachable_target():
    with pytest.raises(Infeasible, match="not reachable"):
        build(bsc(0.1), [0.01, 0.99])


def test_basis_directions_are_in_null_space():
    W = np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]])
    poly = build(W, [0.5, 0.5])
    assert poly.dim == 1
    for d in poly.basis:
        assert np.max(np.abs(d @ W)) <= 1e-9
        assert abs(d.sum()) <= 1e-9


def test_singleton_minimize_returns_anchor():
    poly = build(bsc(0.2), [0.5, 0.5])
    p, v = minimize_over(poly, lambda q: q.probs[0] ** 2)
    np.testing.assert_allclose(p.probs, [0.5, 0.5])
    assert v == pytest.approx(0.25)


def test_constant_objective():
    r = [0.3, 0.7]
    _, v = minimize_over(build([r, r, r], r), lambda q: 4.2)
    assert v == 4.2


def test_one_dimensional_quadratic_matches_golden_section():
    W = np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]])
    poly = build(W, [0.5, 0.5])
    target = np.array([0.1, 0.2, 0.7])
    obj = lambda q: float(np.sum((q.probs - target) ** 2))

    # independent oracle: golden section along the segment between the two vertices
    a, b = poly.vertices
    _, ref, _ = golden_min(lambda t: obj(type("P", (), {"probs": (1 - t) * a + t * b})), 0, 1, 1e-10)

    diag = {}
    p, v = minimize_over(poly, obj, diagnostics=diag)
    assert v == pytest.approx(ref, abs=1e-5)
    assert poly.residual(p.probs) <= 1e-8
    assert v <= obj(type("P", (), {"probs": poly.anchor})) + 1e-12
    assert diag["convexity_violations"] == 0


def test_returned_points_are_feasible():
    rng = np.random.default_rng(3)
    for _ in range(10):
        W = rng.dirichlet(np.ones(2), size=4)
        px = rng.dirichlet(np.ones(4))
        poly = build(W, px @ W)
        c = rng.dirichlet(np.ones(4))
        p, v = minimize_over(poly, lambda q: float(np.sum((q.probs - c) ** 2)), resolution=9)
        assert poly.residual(p.probs) <= 1e-8
        assert p.probs.min() >= 0
