import numpy as np
import pytest

from colvar.nets import make_eps_grid
from colvar.symmetry import (
    SIGN,
    Trajectory,
    VectorField,
    central_lagrangian,
    characteristics,
    conservation_drift,
    infinitesimal_criterion,
    noether_current,
    noether_identity_check,
    particle_lagrangian,
    prolong,
    sample_jets,
    taylor_check,
    time_translation,
    translation,
)
from colvar.variational import Lagrangian

G = make_eps_grid(1e-3, 1e-1, 4)
X, J = sample_jets(1, 3, n=50, seed=3)


def test_prolong_x_du():
    v = VectorField(lambda x: np.zeros_like(x), [lambda x, u: x * np.ones_like(u[0])])
    pv = prolong(v, 1)
    np.testing.assert_allclose(pv.coefficient(1, 0, 0.0, X, J), 1.0, atol=1e-8)
    np.testing.assert_allclose(characteristics(v)(0.0, X, J)[0], X)


def test_prolong_u_du():
    v = VectorField(lambda x: np.zeros_like(x), [lambda x, u: u[0]])
    pv = prolong(v, 2)
    np.testing.assert_allclose(pv.coefficient(1, 0, 0.0, X, J), J[1][0], atol=1e-8)
    np.testing.assert_allclose(pv.coefficient(2, 0, 0.0, X, J), J[2][0], atol=1e-6)


def test_prolong_time_translation_is_trivial():
    pv = prolong(time_translation(), 2)
    np.testing.assert_allclose(characteristics(time_translation())(0.0, X, J)[0], -J[1][0])
    np.testing.assert_allclose(pv.coefficient(1, 0, 0.0, X, J), 0.0, atol=1e-6)
    np.testing.assert_allclose(pv.coefficient(2, 0, 0.0, X, J), 0.0, atol=1e-5)


def test_prolongation_matches_taylor_curves():
    v = VectorField(lambda x: x**2, [lambda x, u: np.sin(x) * u[0]])
    assert taylor_check(prolong(v, 2), X, J) < 1e-6


def test_rotation_characteristics():
    rot = translation(2, 1)
    x2, J2 = sample_jets(2, 1, n=10)
    Q = characteristics(rot)(0.0, x2, J2)
    np.testing.assert_allclose(Q, np.array([np.zeros(10), np.ones(10)]))


def smooth_particle():
    return particle_lagrangian(lambda e, x: np.cos(x) + e * x**2, lambda e, x: -np.sin(x) + 2 * e * x)


def test_criterion_autonomous_particle():
    assert infinitesimal_criterion(smooth_particle(), time_translation(), G).verdict == "Symmetry"


def test_criterion_central_rotation():
    L = central_lagrangian(lambda e, r: -1.0 / np.sqrt(r**2 + e**2))
    x2, J2 = sample_jets(2, 1, ranges=[[(0.5, 2.0), (-1.0, 1.0)], [(-1.0, 1.0), (-1.0, 1.0)]])
    assert infinitesimal_criterion(L, translation(2, 1), G, jets=(x2, J2)).verdict == "Symmetry"


def test_criterion_detects_time_dependence():
    L = Lagrangian(lambda e, t, J: 0.5 * J[1][0] ** 2 - t * J[0][0])
    r = infinitesimal_criterion(L, time_translation(), G, jets=(X, J[:2]))
    assert r.verdict == "NotSymmetry"
    # residual dL/dt = -x
    assert r.residual.samples[0] == pytest.approx(np.max(np.abs(J[0][0])), rel=1e-6)


def test_energy_current():
    L = smooth_particle()
    P = noether_current(L, time_translation())
    e = 0.01
    energy = 0.5 * J[1][0] ** 2 + np.cos(J[0][0]) + e * J[0][0] ** 2
    np.testing.assert_allclose(np.abs(P(e, X, J[:2])), np.abs(energy), rtol=1e-7)


def test_angular_momentum_current():
    m = 2.0
    L = central_lagrangian(lambda e, r: -1.0 / r, m=m)
    x2, J2 = sample_jets(2, 1, ranges=[[(0.5, 2.0), (-1.0, 1.0)], [(-1.0, 1.0), (-1.0, 1.0)]])
    P = noether_current(L, translation(2, 1))
    np.testing.assert_allclose(P(0.1, x2, J2), m * J2[0][0] ** 2 * J2[1][1], rtol=1e-8)


def test_momentum_current():
    free = Lagrangian(lambda e, t, J: 0.5 * J[1][0] ** 2)
    P = noether_current(free, translation(1, 0))
    np.testing.assert_allclose(P(0.0, X, J[:2]), J[1][0], rtol=1e-8)


def test_noether_identity():
    L = smooth_particle()
    assert noether_identity_check(noether_current(L, time_translation()), G).verdict == "pass"
    Lc = central_lagrangian(lambda e, r: -1.0 / np.sqrt(r**2 + e**2), lambda e, r: r / (r**2 + e**2) ** 1.5)
    x2, J2 = sample_jets(2, 2, ranges=[[(0.5, 2.0), (-1.0, 1.0)]] + [[(-1.0, 1.0)] * 2] * 2)
    assert noether_identity_check(noether_current(Lc, translation(2, 1)), G, jets=(x2, J2)).verdict == "pass"


def test_noether_identity_rejects_broken_current():
    P = noether_current(smooth_particle(), time_translation())
    P.drop_xi_L = True
    assert noether_identity_check(P, G).verdict == "fail"


def test_calibrated_sign():
    assert SIGN in (-1.0, 1.0)


def test_free_particle_drift_zero():
    t = np.linspace(0.0, 2.0, 101)
    samples = [(t, np.array([1.0 + 0.5 * t]), np.array([np.full_like(t, 0.5)])) for _ in G.values]
    free = Lagrangian(lambda e, t, J: 0.5 * J[1][0] ** 2)
    rep = conservation_drift(noether_current(free, time_translation()), Trajectory(G, samples, 1e-10))
    assert rep.max_drift <= 1e-15
