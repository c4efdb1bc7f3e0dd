import numpy as np
import pytest

from colvar.asymptotics import classify, weak_association
from colvar.calculus import (
    DEFAULT_MOLLIFIER,
    Mollifier,
    differentiate,
    fornberg,
    integrate,
    make_delta,
    mollify_embed,
    signed_strict_delta,
    step_function,
)
from colvar.nets import GridNet, NetError, SpatialGrid, make_eps_grid

G = make_eps_grid(1e-3, 1e-1, 4)


def test_fornberg_central_weights():
    np.testing.assert_allclose(fornberg(0.0, np.array([-1.0, 0.0, 1.0]), 2), [1.0, -2.0, 1.0], atol=1e-14)


def test_cubic_derivative_exact():
    u = GridNet.from_function(G, SpatialGrid(-1.0, 1.0, 101), lambda e, x: x**3)
    du = differentiate(u, 1)
    for x, v in zip(u.spatial, du.values):
        np.testing.assert_allclose(v, 3 * x.nodes**2, atol=1e-11)


def test_second_derivative_fourth_order():
    errs = []
    for n in (51, 101):
        u = GridNet.from_function(G, SpatialGrid(0.0, 2.0, n), lambda e, x: np.sin(x))
        d2 = differentiate(u, 2)
        errs.append(np.max(np.abs(d2.values[0] + np.sin(u.spatial[0].nodes))))
    assert errs[1] < 1e-6
    assert errs[0] / errs[1] > 12


def test_integrate_exact_cases():
    one = GridNet.from_function(G, SpatialGrid(0.0, 1.0, 11), lambda e, x: np.ones_like(x))
    np.testing.assert_allclose(integrate(one).samples, 1.0, atol=1e-15)
    sq = GridNet.from_function(G, SpatialGrid(0.0, 1.0, 101), lambda e, x: x**2)
    np.testing.assert_allclose(integrate(sq).samples, 1 / 3, atol=1e-10)


def test_model_delta_mass_and_peak():
    d = make_delta("model", G)
    assert d.checks["support_shrinks"] and d.checks["mass_to_one"]
    # "resolved support": 96 nodes per eps across the bump
    u = d.realize((-1.0, 1.0), per_eps=96)
    np.testing.assert_allclose(integrate(u).samples, 1.0, atol=1e-8)
    peak = np.array([d(float(e), np.array([0.0]))[0] for e in G.values])
    np.testing.assert_allclose(peak * G.values, DEFAULT_MOLLIFIER(np.array([0.0]))[0], rtol=1e-13)
    from colvar.nets import GenNumber

    assert classify(GenNumber(G, peak)).label == "Moderate(1)"


def test_strict_delta_signed_bounded():
    d = make_delta("strict", G, signed_strict_delta)
    assert d.checks["abs_mass_bounded"]
    assert d.checks["max_abs_mass"] > 1.0  # it is signed
    np.testing.assert_allclose(d.checks["mass"], 1.0, atol=1e-8)


def test_bad_mollifier_rejected():
    with pytest.raises(NetError):
        Mollifier(shape=lambda y: np.ones_like(y), norm=3.0)


def test_derivative_of_step_is_delta():
    u = mollify_embed(step_function(0.0, 1.0), G, (-1.0, 1.0), breaks=[0.0])
    du = differentiate(u, 1)
    assert weak_association(du, {"points": [(0.0, 1.0)]}).passed


def test_mollify_smooth_is_second_order():
    g = make_eps_grid(1e-3, 1e-1, 5)
    u = mollify_embed(np.cos, g, (-1.0, 1.0))
    err = np.array([np.max(np.abs(v - np.cos(x))) for _, x, v in u.items()])
    slope = np.polyfit(np.log(g.values), np.log(err), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_mollify_abs_at_zero_is_order_eps():
    g = make_eps_grid(1e-3, 1e-1, 5)
    u = mollify_embed(np.abs, g, (-1.0, 1.0), breaks=[0.0])
    at0 = np.array([v[np.argmin(np.abs(x))] for _, x, v in u.items()])
    # exact value eps * int |y| m(y) dy
    t = np.linspace(-1, 1, 200001)
    c = np.trapezoid(np.abs(t) * DEFAULT_MOLLIFIER(t), t)
    np.testing.assert_allclose(at0 / g.values, c, rtol=1e-6)
