import numpy as np
import pytest

from colvar.gen_opt import (
    EpsFunctionFamily,
    bump_family,
    check_critical,
    neighborhood_min_test,
    series_family,
    sufficient_min_check,
    well_bump,
    zero_divisor_family,
)
from colvar.nets import NetError, make_eps_grid, make_zero_divisor_pair

G = make_eps_grid(1e-3, 1e-1, 7)


def square(grid=G):
    return EpsFunctionFamily(grid, lambda e, x: float(x[0] ** 2), [(-1.0, 1.0)])


def test_well_bump_shape():
    x = np.array([0.0, 0.1, 1.0, -1.0, 2.0])
    v = well_bump(x)
    assert v[0] == 0.0 and v[1] == pytest.approx(0.01)
    assert v[2] == pytest.approx(-1.0) and v[3] == pytest.approx(-1.0)


def test_square_is_unique_minimum():
    crit = check_critical(square(), [0.0])
    assert crit.grad_report.negligible and crit.hessian == "PositiveDefinite"
    assert neighborhood_min_test(square(), [0.0], 0.5).verdict == "IsMinimumOnProbes"
    assert sufficient_min_check(square(), [0.0], 0.5).verdict == "UniqueMinimum"


def test_bump_counterexample():
    f = bump_family(G)
    crit = check_critical(f, [0.0])
    assert crit.grad_report.negligible
    assert crit.hessian == "PositiveDefinite"
    # f''(0) = 2 / eps^2
    np.testing.assert_allclose(np.ravel(crit.hessian_eigs), 2 / G.values**2, rtol=1e-4)
    mt = neighborhood_min_test(f, [0.0], 0.9)
    assert mt.fails
    assert mt.witness.kind == "near-standard"
    np.testing.assert_allclose(mt.value.samples, -1.0, atol=1e-9)
    ratio = np.abs(np.ravel(mt.witness.coords)) / G.values
    assert np.all((ratio > 0.5) & (ratio <= 1.0))
    # the generalized point eps itself
    np.testing.assert_allclose([f.value(float(e), [e]) for e in G.values], -1.0, atol=1e-12)


def test_bump_sufficient_check_inconclusive():
    assert sufficient_min_check(bump_family(G), [0.0], 0.9).verdict == "Inconclusive"


def test_series_counterexample_classical_point():
    g = make_eps_grid(5e-4, 5e-2, 7)
    mt = neighborhood_min_test(series_family(g), [0.0], 1.0)
    assert mt.fails and mt.witness.kind == "classical"
    n0 = int(round(1.0 / float(np.ravel(mt.witness.coords)[0])))
    np.testing.assert_allclose(mt.value.samples, -g.values**n0, rtol=1e-12)


def test_zero_divisor_family():
    alpha, _ = make_zero_divisor_pair(G)
    f = zero_divisor_family(G, alpha)
    crit = check_critical(f, [0.0])
    assert crit.grad_report.negligible and crit.hessian == "PositiveSemidefinite"
    assert sufficient_min_check(f, [0.0], 0.5).verdict == "Minimum"


def test_noncritical_point_rejected():
    with pytest.raises(NetError):
        sufficient_min_check(square(), [0.3], 0.2)


def test_base_point_must_be_interior():
    with pytest.raises(NetError):
        check_critical(square(), [1.0])
