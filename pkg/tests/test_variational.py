import math

import numpy as np
import pytest

from colvar.asymptotics import bump, classify, scalar_association, weak_association
from colvar.calculus import DEFAULT_MOLLIFIER, convolve, make_delta, mollify_embed, step_function
from colvar.nets import GenNumber, GridNet, NetError, SpatialGrid, make_eps_grid, resolved_grid
from colvar.scenarios.elastic import weierstrass_lagrangian
from colvar.variational import (
    CrossCheckError,
    DegenerateError,
    Functional,
    Lagrangian,
    NegligibleInput,
    QuadraticForm,
    assoc_minimizer_test,
    euler_residual,
    evaluate,
    first_variation,
    fundamental_witness,
    interior,
    quadratic_stationarity,
    second_variation,
    solve_quadratic_bvp,
)

G = make_eps_grid(1e-3, 1e-1, 6)
S01 = SpatialGrid(0.0, 1.0, 401)


def net(fn, s=S01, grid=G):
    return GridNet.from_function(grid, s, lambda e, x: fn(x))


def dirichlet_energy():
    return Lagrangian(lambda e, x, J: 0.5 * J[1][0] ** 2, partials={0: lambda e, x, J: np.zeros_like(J[0]),
                                                                    1: lambda e, x, J: J[1]})


def test_evaluate_dirichlet_energy():
    F = Functional(dirichlet_energy(), (0.0, 1.0))
    np.testing.assert_allclose(evaluate(F, net(lambda x: x)).samples, 0.5, atol=1e-12)


def test_evaluate_with_delta_source():
    d = make_delta("model", G)
    L = Lagrangian(lambda e, x, J: 0.5 * J[1][0] ** 2 - d(e, x) * J[0][0])
    u = GridNet.from_function(G, lambda e: resolved_grid(-1.0, 1.0, e, per_eps=96), lambda e, x: np.cos(x))
    F = Functional(L, (-1.0, 1.0))
    # 1/2 int sin^2 minus the delta pairing, which is (cos * rho_eps)(0) for an even bump
    pair = np.array([convolve(np.cos, [], DEFAULT_MOLLIFIER, float(e), np.array([0.0]))[0] for e in G.values])
    exact = 0.5 * (1.0 - math.sin(2.0) / 2.0) - pair
    np.testing.assert_allclose(evaluate(F, u).samples, exact, atol=1e-6)
    assert abs(pair[-1] - 1.0) < 1e-6


def test_weierstrass_values_decay_linearly():
    u = mollify_embed(step_function(0.0, 1.0), G, (-1.0, 1.0), breaks=[0.0])
    vals = evaluate(Functional(weierstrass_lagrangian(), (-1.0, 1.0)), u).samples
    assert np.all(np.diff(vals) < 0)
    slope = np.polyfit(np.log(G.values), np.log(vals), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


def test_first_variation_simple_cases():
    half_sq = Lagrangian(lambda e, x, J: 0.5 * J[0][0] ** 2, partials={0: lambda e, x, J: J[0],
                                                                    1: lambda e, x, J: np.zeros_like(J[1])})
    one = net(np.ones_like)
    np.testing.assert_allclose(first_variation(Functional(half_sq, (0.0, 1.0)), one, one).samples, 1.0, atol=1e-10)
    F = Functional(dirichlet_energy(), (0.0, 1.0))
    v = net(lambda x: np.sin(np.pi * x))
    np.testing.assert_allclose(first_variation(F, net(lambda x: x), v).samples, 0.0, atol=1e-10)


def test_first_variation_of_quadratic_form():
    Q = QuadraticForm(alpha=lambda e, x: 1.0 + x, beta=2.0, gamma=lambda e, x: np.cos(x))
    u, v = net(lambda x: x**2), net(lambda x: np.sin(3 * x))
    dl = first_variation(Q.functional((0.0, 1.0)), u, v).samples
    np.testing.assert_allclose(dl, (Q.a(u, v) + Q.f(v)).samples, rtol=1e-8)


def test_first_variation_cross_check_catches_wrong_partials():
    bad = Lagrangian(lambda e, x, J: 0.5 * J[1][0] ** 2, partials={0: lambda e, x, J: np.zeros_like(J[0]),
                                                               1: lambda e, x, J: 2 * J[1]})
    with pytest.raises(CrossCheckError):
        first_variation(Functional(bad, (0.0, 1.0)), net(lambda x: x**2), net(np.sin))


def test_dirichlet_variations_must_vanish_at_ends():
    F = Functional(dirichlet_energy(), (0.0, 1.0), {"left": [0.0], "right": [1.0]})
    with pytest.raises(NetError):
        first_variation(F, net(lambda x: x), net(np.cos))


def test_second_variation_membrane():
    Q = QuadraticForm(alpha=1.0)
    v = net(lambda x: np.sin(np.pi * x))
    val = second_variation(Q.functional((0.0, 1.0)), net(lambda x: x), v, quadratic=Q).samples
    np.testing.assert_allclose(val, np.pi**2 / 2, rtol=1e-6)


def test_second_variation_beam():
    L = Lagrangian(lambda e, x, J: 0.5 * J[2][0] ** 2, order=2)
    v = net(lambda x: np.sin(np.pi * x))
    val = second_variation(Functional(L, (0.0, 1.0)), net(lambda x: 0 * x), v).samples
    np.testing.assert_allclose(val, np.pi**4 / 2, rtol=1e-5)


def test_second_variation_zero_direction():
    Q = QuadraticForm(alpha=1.0, beta=1.0)
    z = net(lambda x: 0 * x)
    assert np.all(second_variation(Q.functional((0.0, 1.0)), net(np.sin), z) .samples == 0.0)


def test_euler_residual_exact_solution():
    Q = QuadraticForm(alpha=1.0, gamma=2.0)  # -u'' = 2
    r = euler_residual(Q.functional((0.0, 1.0)), net(lambda x: x * (1 - x)))[0]
    assert classify(r, interior((0.0, 1.0)), alpha_max=0, floor=1e-9).negligible


def test_euler_residual_particle_sign():
    # L = 1/2 x'^2 - V(x) with V = x^2/2: E(L) = -(x'' + x)
    L = Lagrangian(lambda e, t, J: 0.5 * J[1][0] ** 2 - 0.5 * J[0][0] ** 2)
    F = Functional(L, (0.0, 1.0))
    sol = euler_residual(F, net(np.cos))[0]
    assert np.max(np.abs(sol.values[0][5:-5])) < 1e-6
    other = euler_residual(F, net(lambda t: t**2))[0]
    np.testing.assert_allclose(other.values[0][5:-5], -(2 + S01.nodes[5:-5] ** 2), atol=1e-6)


def test_weierstrass_residual_weakly_zero_only():
    u = mollify_embed(step_function(0.0, 1.0), G, (-1.0, 1.0), breaks=[0.0])
    r = euler_residual(Functional(weierstrass_lagrangian(), (-1.0, 1.0)), u)[0]
    assert not classify(r, (-0.5, 0.5)).negligible
    assert weak_association(r, 0.0, [bump(0.05, 0.4), bump(-0.1, 0.3)]).passed


def test_witness_constant_net():
    w = fundamental_witness(net(np.ones_like))
    assert not w.report.negligible
    phi = w.phi(len(G) - 1)
    t = np.linspace(0, 1, 200001)
    np.testing.assert_allclose(w.pairing.samples[-1], np.trapezoid(phi(t), t), rtol=1e-4)


def test_witness_power_slope():
    s = SpatialGrid(-1.0, 1.0, 401)
    b = bump(0.0, 0.8)
    u = GridNet.from_function(G, s, lambda e, x: e**3 * b(x))
    w = fundamental_witness(u)
    assert w.l == pytest.approx(3.0, abs=1e-9)
    assert w.N == 0
    assert w.observed_slope == pytest.approx(w.predicted_slope, abs=0.3)


def test_witness_negligible_raises():
    with pytest.raises(NegligibleInput):
        fundamental_witness(GridNet.from_function(G, S01, lambda e, x: math.exp(-1 / e) * np.ones_like(x)))


def test_assoc_minimizer_weierstrass_and_failures():
    F = Functional(weierstrass_lagrangian(), (-1.0, 1.0))
    tests = [bump(0.3, 0.2), bump(-0.2, 0.3)]
    u = mollify_embed(step_function(0.0, 1.0), G, (-1.0, 1.0), breaks=[0.0])
    assert assoc_minimizer_test(F, u, tests).passed
    lin = GridNet.from_function(G, SpatialGrid(-1.0, 1.0, 401), lambda e, x: x)
    assert assoc_minimizer_test(F, lin, tests).verdict == "fail"
    Q = QuadraticForm(alpha=lambda e, x: 2 * x**2)
    assert quadratic_stationarity(Q, lin, tests).verdict == "fail"


def test_assoc_minimizer_square_at_zero():
    L = Lagrangian(lambda e, x, J: J[0][0] ** 2)
    zero = GridNet.from_function(G, S01, lambda e, x: 0 * x)
    assert assoc_minimizer_test(Functional(L, (0.0, 1.0)), zero, [bump(0.5, 0.3)]).passed


def test_quadratic_stationarity_of_bvp_solution():
    Q = QuadraticForm(alpha=lambda e, x: 1.0 + x**2, beta=1.0, gamma=1.0)
    sol = solve_quadratic_bvp(Q, G).solution
    tests = [bump(0.5, 0.3), bump(0.3, 0.2)]
    assert quadratic_stationarity(Q, sol, tests).passed
    shifted = sol.map(lambda e, x, v: v + bump(0.5, 0.2)(x))
    assert quadratic_stationarity(Q, shifted, tests).verdict == "fail"
    zero = GridNet.from_function(G, S01, lambda e, x: 0 * x)
    assert quadratic_stationarity(QuadraticForm(alpha=1.0), zero, tests).passed


def test_bvp_closed_form():
    res = solve_quadratic_bvp(QuadraticForm(alpha=1.0, gamma=1.0), G)
    for _, x, v in res.solution.items():
        np.testing.assert_allclose(v, x * (1 - x) / 2, atol=1e-8)
    assert res.residual_report.negligible


def test_bvp_small_alpha_has_no_shadow():
    Q = QuadraticForm(alpha=lambda e, x: np.full_like(x, e), gamma=1.0)
    sol = solve_quadratic_bvp(Q, G).solution
    for e, x, v in sol.items():
        np.testing.assert_allclose(v, x * (1 - x) / (2 * e), rtol=1e-8)
    mid = GenNumber(G, np.array([np.interp(0.5, x, v) for _, x, v in sol.items()]))
    assert classify(mid).label == "Moderate(1)"
    assert scalar_association(mid) is None


def test_bvp_degenerate_alpha():
    with pytest.raises(DegenerateError):
        solve_quadratic_bvp(QuadraticForm(alpha=0.0, gamma=1.0), G)
