import numpy as np
import pytest

from colvar.scenarios import (
    SCENARIOS,
    beam_with_joint,
    central_field,
    delta_particle,
    geodesic_energy,
    hard_rod,
    rod_general,
    string_with_spring,
    wave_delta_spring,
    weierstrass,
)


def assert_passed(res):
    failed = [k for k, v in res.checks.items() if not v]
    assert not failed, f"{res.name}: failed checks {failed}"


def test_registry():
    assert len(SCENARIOS) == 9


@pytest.mark.parametrize("y0", [-2.0, 0.0])
def test_delta_particle(y0):
    res = delta_particle(y0=y0)
    assert_passed(res)
    sup = [r["value"] for r in res.shadow["sup_distance"]]
    assert sup[-1] <= 0.02
    files = res.csv_files()
    assert files["trajectory.csv"].startswith("epsilon,")


def test_central_field_circular_orbit():
    res = central_field()
    assert_passed(res)
    assert "circular_orbit" in res.checks


def test_central_field_free_straight_line():
    res = central_field(potential="zero", phidot0=0.5)
    assert_passed(res)
    assert "straight_line" in res.checks


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_string_with_spring(gamma):
    res = string_with_spring(gamma=gamma)
    assert_passed(res)
    assert res.checks["kink_limit"]


def test_beam_linear_joint_converges():
    res = beam_with_joint()
    assert_passed(res)
    assert res.shadow["D_converges"] and res.shadow["D_cauchy"] < 1e-2
    assert "D_limit_estimate" in res.shadow
    assert res.shadow["midpoint_error"]["value"] <= 1e-3


def test_beam_quadratic_joint_skips_limit():
    res = beam_with_joint(h="eps^2")
    assert_passed(res)
    assert not res.shadow["D_converges"]
    assert "midpoint_limit" not in res.checks


@pytest.mark.parametrize("f", [1.0, 0.0])
def test_hard_rod(f):
    res = hard_rod(f=f)
    assert_passed(res)
    assert res.checks["closed_form"]


@pytest.mark.parametrize("law,f", [("cubic", 1.0), ("linear", 1.0), ("cubic", 0.0)])
def test_rod_general(law, f):
    res = rod_general(law=law, f=f)
    assert_passed(res)


def test_weierstrass():
    res = weierstrass()
    assert_passed(res)
    assert abs(res.shadow["slope"] - 1.0) <= 0.15


@pytest.mark.parametrize("force", ["zero", "cubic"])
def test_wave_short_horizon(force):
    res = wave_delta_spring(force=force, T=0.5, frames=10)
    assert_passed(res)


@pytest.mark.parametrize("metric,x0", [("conformal", (-0.5, 0.0)), ("polar", (1.0, 0.2)), ("euclidean", (-0.5, 0.0))])
def test_geodesic_energy(metric, x0):
    res = geodesic_energy(metric=metric, x0=x0)
    assert_passed(res)


def test_result_document_is_plain_json():
    import json

    from colvar.nets import dumps

    doc = json.loads(dumps(hard_rod().to_dict()))
    assert doc["passed"] is True
    assert set(doc) >= {"checks", "classifications", "shadow", "params"}
    assert np.isfinite(doc["params"]["ell"])
