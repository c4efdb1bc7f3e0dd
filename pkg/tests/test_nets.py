import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colvar.asymptotics import classify
from colvar.calculus import DEFAULT_MOLLIFIER, convolve, mollify_embed, step_function
from colvar.nets import (
    EpsGrid,
    GenNumber,
    GenPoint,
    GridNet,
    NetError,
    SpatialGrid,
    dumps,
    eval_at,
    fmt,
    gen_number,
    make_eps_grid,
    make_zero_divisor_pair,
    read_csv,
)


def test_make_eps_grid_geometric():
    g = make_eps_grid(1e-4, 1e-1, 4)
    np.testing.assert_allclose(g.values, [1e-1, 1e-2, 1e-3, 1e-4], rtol=1e-13)


def test_make_eps_grid_ratio():
    g = make_eps_grid(1e-3, 1.0, 7)
    assert len(g) == 7
    np.testing.assert_allclose(g.values[1:] / g.values[:-1], 10 ** -0.5, rtol=1e-12)


def test_make_eps_grid_rejects_empty_range():
    with pytest.raises(NetError):
        make_eps_grid(0.5, 0.5, 4)


@pytest.mark.parametrize("vals", [[0.1, 0.01, 0.001], [0.1, 0.05, 0.02, 0.01], [0.1, 0.2, 0.01, 0.001], [2.0, 0.1, 0.01, 0.001]])
def test_grid_invariants(vals):
    with pytest.raises(NetError):
        EpsGrid(np.array(vals))


def test_grid_tail_is_smallest_half():
    g = make_eps_grid(1e-4, 1e-1, 7)
    assert np.array_equal(g.values[g.tail], g.values[3:])


def test_gen_number_rules():
    g = make_eps_grid(1e-4, 1e-1, 4)
    np.testing.assert_allclose(gen_number(g, lambda e: e**2).samples, g.values**2)
    assert np.all(gen_number(g, lambda e: 1.0).samples == 1.0)
    x = gen_number(make_eps_grid(1e-3, 1e-1, 4), lambda e: math.exp(-1 / e))
    assert x.samples[-1] == math.exp(-1000.0)


def test_arithmetic_identities():
    g = make_eps_grid(1e-4, 1e-1, 6)
    e = gen_number(g, lambda x: x)
    assert np.all((e * (1 / e)).samples == pytest.approx(1.0, rel=1e-15))
    sq = e**2
    assert np.all((sq + (-sq)).samples == 0.0)


def test_zero_divisor_pair():
    g = make_eps_grid(1e-4, 1e-1, 4)
    a, w = make_zero_divisor_pair(g)
    assert a.samples.tolist() == [1, 0, 1, 0]
    assert w.samples.tolist() == [0, 1, 0, 1]
    assert np.all((a * w).samples == 0.0)
    rep = classify(a)
    assert not rep.negligible and rep.cls == "Moderate"


def test_division_by_vanishing_net():
    g = make_eps_grid(1e-4, 1e-1, 4)
    a, _ = make_zero_divisor_pair(g)
    with pytest.raises(ZeroDivisionError):
        1.0 / a


def test_mixed_grids_rejected():
    a = gen_number(make_eps_grid(1e-4, 1e-1, 4), lambda e: e)
    b = gen_number(make_eps_grid(1e-4, 1e-1, 5), lambda e: e)
    with pytest.raises(NetError):
        a + b


def test_eval_at_classical_and_eps_points():
    g = make_eps_grid(1e-3, 1e-1, 4)
    u = GridNet.from_function(g, SpatialGrid(-1.0, 1.0, 201), lambda e, x: x)
    v = eval_at(u, GenPoint.classical(g, 0.5))
    np.testing.assert_allclose(v.samples, 0.5, atol=1e-14)
    p = GenPoint.near_standard(g, lambda e: e, 0.0)
    np.testing.assert_allclose(eval_at(u, p).samples, g.values, atol=1e-14)


def test_eval_at_mollified_step_matches_quadrature():
    g = make_eps_grid(1e-3, 1e-1, 4)
    step = step_function(0.0, 1.0)
    u = mollify_embed(step, g, (-1.0, 1.0), breaks=[0.0])
    p = GenPoint.near_standard(g, lambda e: 0.5 * e, 0.0)
    vals = eval_at(u, p).samples
    direct = [convolve(step, [0.0], DEFAULT_MOLLIFIER, float(e), np.array([0.5 * e]))[0] for e in g.values]
    np.testing.assert_allclose(vals, direct, atol=1e-6)
    # the same interior value of the mollifier CDF at every eps
    np.testing.assert_allclose(vals, vals[0], atol=1e-6)


def test_eval_at_outside_domain():
    g = make_eps_grid(1e-3, 1e-1, 4)
    u = GridNet.from_function(g, SpatialGrid(0.0, 1.0, 11), lambda e, x: x)
    with pytest.raises(NetError):
        eval_at(u, GenPoint.classical(g, 2.0))


def test_gridnet_rejects_nonfinite():
    g = make_eps_grid(1e-3, 1e-1, 4)
    with pytest.raises(NetError):
        GridNet.from_function(g, SpatialGrid(0.0, 1.0, 11), lambda e, x: np.full_like(x, np.nan))


def test_fmt_is_17_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(float("inf")) == "inf"


def test_dumps_sorted_and_stable():
    s = dumps({"b": 1.0 / 3, "a": [1, True, None]})
    assert s.index('"a"') < s.index('"b"')
    assert "0.33333333333333331" in s
    assert dumps({"b": 1.0 / 3, "a": [1, True, None]}) == s


def test_csv_roundtrip_gridnet():
    g = make_eps_grid(1e-3, 1e-1, 4)
    u = GridNet.from_function(g, SpatialGrid(0.0, 1.0, 21), lambda e, x: np.sin(x / e))
    back = read_csv(u.to_csv())
    assert back.grid == g
    for a, b in zip(u.values, back.values):
        assert np.array_equal(a, b)


def test_read_csv_malformed():
    with pytest.raises(NetError):
        read_csv("epsilon,value\n0.1,abc\n")
    with pytest.raises(NetError):
        read_csv("foo,bar\n1,2\n")
    with pytest.raises(NetError):
        read_csv("")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=5, max_size=5))
def test_gen_number_csv_roundtrip(vals):
    g = make_eps_grid(1e-4, 1e-1, 5)
    x = GenNumber(g, np.array(vals))
    y = read_csv(x.to_csv())
    assert np.array_equal(x.samples, y.samples)
    assert y.grid == g
