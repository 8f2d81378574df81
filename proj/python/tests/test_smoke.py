import math

import numpy as np
import pytest

import cbt


def test_escape_time_on_ball():
    assert cbt.escape_time([0, 0, 0], [0, 0, 1]) == pytest.approx(1.0)
    assert cbt.escape_time([0.5, 0, 0], [1, 0, 0]) == pytest.approx(1.5)
    grad = cbt.escape_time_gradient([0.5, 0, 0], [1, 0, 0])
    assert grad == pytest.approx([1, 0, 0])


def test_escape_time_on_ellipsoid():
    dom = {"kind": "ellipsoid", "semi_axes": [2, 1, 1]}
    assert cbt.escape_time([0, 0, 0], [1, 0, 0], dom) == pytest.approx(2.0)


def test_attenuation_closed_form():
    coeffs = {"sigma": {"type": "constant", "value": 1.0}}
    one = {"type": "constant", "value": 1.0}
    v = cbt.solve_attenuation(one, coeffs, [0, 0, 0], [0, 1, 0])
    assert v == pytest.approx(1 - math.exp(-1), abs=1e-10)


def test_lift_and_explicit_csda():
    one = {"type": "constant", "value": 1.0}
    assert cbt.lift_inflow(one, 1.0, [0, 0, 0], [1, 0, 0]) == pytest.approx(math.exp(-1))
    # f = 1, sigma = 0: integral over min(Em - E, t)
    assert cbt.explicit_csda(one, 0.0, [0, 0, 0], [1, 0, 0], 0.25) == pytest.approx(0.75, abs=1e-10)


def test_solve_field_shapes_and_values():
    out = cbt.solve_field(
        {
            "problem": "attenuation",
            "grid": {"nodes_per_axis": 9, "n_theta": 2, "n_phi": 4, "n_energy": 2},
            "coefficients": {"sigma": {"type": "constant", "value": 0.0}},
        }
    )
    vals = out["values"]
    assert vals.shape == (out["positions"].shape[0], 2, 8)
    # sigma = 0, f = 1: psi equals the escape time
    x = out["positions"][0]
    w = out["directions"][3]
    assert vals[0, 0, 3] == pytest.approx(cbt.escape_time(x, w), abs=1e-10)
    assert np.all(vals >= 0)


def test_scenario_and_errors():
    report = cbt.run_scenario(
        {"problem": "attenuation", "grid": {"nodes_per_axis": 9, "n_theta": 2, "n_phi": 4}}
    )
    assert report["schema_version"] == 1
    assert all(p["pass"] for p in report["properties"])
    with pytest.raises(cbt.Error) as info:
        cbt.run_scenario({"problem": "diffusion"})
    assert info.value.code == "ConfigError"
    with pytest.raises(cbt.Error) as info:
        cbt.escape_time([2, 0, 0], [1, 0, 0])
    assert info.value.code == "OutsideDomain"


def test_verify_geometry():
    report = cbt.verify("geometry")
    assert report["kind"].endswith("geometry")
    assert all(p["pass"] for p in report["properties"])
