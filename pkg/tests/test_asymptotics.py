import math

import numpy as np
import pytest

from colvar.asymptotics import (
    bump,
    classify,
    classify_definiteness,
    default_tests,
    is_invertible,
    is_strictly_positive,
    lemma_x0_check,
    scalar_association,
    weak_association,
)
from colvar.calculus import make_delta, mollify_embed, step_function
from colvar.nets import GenMatrix, GridNet, gen_number, make_eps_grid, make_zero_divisor_pair, resolved_grid

G = make_eps_grid(1e-4, 1e-1, 10)


def num(rule):
    return gen_number(G, rule)


def test_power_law_positive():
    rep = classify(num(lambda e: e**2))
    assert rep.label == "Moderate(0)"
    assert rep.slope == pytest.approx(2.0, abs=0.05)


def test_power_law_negative():
    rep = classify(num(lambda e: 3 * e**-1.5))
    assert rep.label == "Moderate(2)"
    assert rep.slope == pytest.approx(-1.5, abs=0.05)


def test_exp_neg_inv_negligible():
    x = num(lambda e: math.exp(-1 / e))
    assert classify(x).negligible
    # direct tail check of |x| <= eps^m for m = 1..8
    e, v = G.values[G.tail], x.samples[G.tail]
    for m in range(1, 9):
        assert np.all(v <= e**m)


def test_exp_inv_sqrt_non_moderate():
    assert classify(num(lambda e: math.exp(1 / math.sqrt(e)))).cls == "NonModerate"


def test_lowered_m_max_weakens_negligibility():
    x = num(lambda e: e**3)
    assert not classify(x).negligible
    assert classify(x, m_max=2).negligible


def test_gridnet_classification_uses_derivatives():
    g = make_eps_grid(1e-2, 1.0, 6)
    u = GridNet.from_function(g, lambda e: resolved_grid(0.0, 1.0, e), lambda e, x: e * np.sin(x / e))
    rep = classify(u)
    assert rep.exponents["0"] == "Moderate(0)"
    assert rep.exponents["2"] == "Moderate(1)"
    assert rep.label == "Moderate(1)"


def test_invertibility():
    v = is_invertible(num(lambda e: e))
    assert v.invertible and v.exponent_a == pytest.approx(1.0)
    assert is_invertible(num(lambda e: 1.0)).exponent_a == pytest.approx(0.0)
    assert not is_invertible(num(lambda e: math.exp(-1 / e))).invertible


def test_strict_positivity():
    assert is_strictly_positive(num(lambda e: e)).relation == "StrictlyPositive"
    neg = is_strictly_positive(num(lambda e: -e))
    assert not neg.nonnegative and not neg.strictly_positive
    zero = is_strictly_positive(num(lambda e: 0.0))
    assert zero.nonnegative and not zero.strictly_positive


def test_lemma_x0():
    one = num(lambda e: 1.0)
    assert lemma_x0_check(num(lambda e: math.exp(-1 / e)), one)
    assert not lemma_x0_check(num(lambda e: e**3), one)
    assert lemma_x0_check(num(lambda e: 0.0), num(lambda e: 5 / e))


def test_scalar_association():
    assert scalar_association(num(lambda e: 1 + e)) == pytest.approx(1.0, abs=1e-6)
    assert scalar_association(num(lambda e: 1 / e)) is None
    # strictly negative yet associated with 0
    assert scalar_association(num(lambda e: -e)) == pytest.approx(0.0, abs=1e-6)


def test_delta_weakly_to_point_mass():
    g = make_eps_grid(1e-3, 1e-1, 6)
    u = make_delta("model", g).realize((-1.0, 1.0))
    tests = default_tests(-1.0, 1.0)
    assert len(tests) == 5
    rep = weak_association(u, {"points": [(0.0, 1.0)]}, tests)
    assert rep.passed
    np.testing.assert_allclose(rep.targets, [phi(np.array([0.0]))[0] for phi in tests])


def test_mollified_step_weakly_to_step():
    g = make_eps_grid(1e-3, 1e-1, 6)
    step = step_function(-1.0, 2.0)
    u = mollify_embed(step, g, (-1.0, 1.0), breaks=[0.0])
    assert weak_association(u, {"function": step, "breakpoints": [0.0]}).passed


def test_oscillation_weakly_null():
    g = make_eps_grid(1e-3, 1e-1, 6)
    u = GridNet.from_function(g, lambda e: resolved_grid(-1.0, 1.0, e), lambda e, x: np.sin(x / e))
    rep = weak_association(u, 0.0, [bump(0.1, 0.5), bump(-0.2, 0.3)])
    assert rep.passed


def test_weak_association_detects_mismatch():
    g = make_eps_grid(1e-3, 1e-1, 6)
    u = make_delta("model", g).realize((-1.0, 1.0))
    assert not weak_association(u, 0.0, [bump(0.0, 0.5)]).passed


def test_definiteness():
    g = make_eps_grid(1e-4, 1e-1, 6)
    e = g.values
    diag = lambda a, b: np.array([np.diag([x, y]) for x, y in zip(a, b)])
    assert classify_definiteness(GenMatrix(g, diag(e, np.ones(6)))) == "PositiveDefinite"
    alpha, _ = make_zero_divisor_pair(g)
    assert classify_definiteness(GenMatrix(g, diag(alpha.samples, np.ones(6)))) == "PositiveSemidefinite"
    assert classify_definiteness(GenMatrix(g, np.zeros((6, 2, 2)))) == "PositiveSemidefinite"
    assert classify_definiteness(GenMatrix(g, diag(-np.ones(6), np.ones(6)))) == "Indefinite"
