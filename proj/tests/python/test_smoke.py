import math

import numpy as np
import pytest

import relaxbl


def test_examples_are_listed():
    ids = [e["id"] for e in relaxbl.list_examples()]
    assert ids == ["1a", "1b", "1c", "2", "3", "4", "5"]


def test_run_returns_arrays():
    cfg = relaxbl.example_config("1b")
    out = relaxbl.run(cfg, nx=40)
    assert out["x"].shape == (41,)
    assert out["final"].shape == (41, 2)
    assert out["components"] == ["u", "v"]
    assert out["times"][-1] == pytest.approx(cfg.t_final)
    assert np.all(np.isfinite(out["final"]))


def test_bap_boundary_beats_upwind_on_the_layer_example():
    cfg = relaxbl.example_config("1a")
    t = cfg.t_final
    right = 2 * math.sin(t / 2) + math.sin(t)
    bap = relaxbl.run(cfg, nx=200, scheme="bap")["final"][0, 0]
    up = relaxbl.run(cfg, nx=200, scheme="upwind")["final"][0, 0]
    assert abs(bap - right) < 0.05
    assert abs(up - right) > 0.3


def test_convergence_slopes_near_one():
    cfg = relaxbl.config_from_dict({"example": "1c", "nx": [50, 100, 200, 400]})
    rep = relaxbl.convergence(cfg)
    assert rep["complete"]
    for key in ("l1", "l2", "linf"):
        assert 0.8 <= rep["slopes"][key] <= 1.2


def test_error_norms_and_slope():
    a = np.zeros((11, 1))
    b = np.full((11, 1), 0.5)
    n = relaxbl.error_norms(a, b, 0.1)
    assert n["linf"] == pytest.approx(0.5)
    assert n["l1"] == pytest.approx(0.1 * 11 * 0.5)
    assert relaxbl.fit_slope([0.1, 0.05, 0.025], [0.2, 0.1, 0.05]) == pytest.approx(1.0)


def test_m_eta_decompose_biorthogonal():
    d = relaxbl.m_eta_decompose(-0.5, 100.0)
    lp, rp = np.array(d["l_plus"]), np.array(d["r_plus"])
    lm, rm = np.array(d["l_minus"]), np.array(d["r_minus"])
    assert lp @ rp == pytest.approx(1.0)
    assert lm @ rm == pytest.approx(1.0)
    assert abs(lp @ rm) < 1e-12
    assert d["lambda_minus"] < 0 < d["lambda_plus"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(relaxbl.InvalidArgument, match="cfl"):
        relaxbl.config_from_dict({"example": "1a", "cfl": 2.0})
    with pytest.raises(relaxbl.InvalidArgument):
        relaxbl.example_config("nope")
    with pytest.raises(relaxbl.DegenerateSign):
        relaxbl.m_eta_decompose(0.0, 1.0)
    assert issubclass(relaxbl.InvalidArgument, relaxbl.RelaxblError)


def test_cli_in_process(tmp_path):
    assert relaxbl.run_cli(["compare", "--example", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "compare.csv").exists()
    assert relaxbl.run_cli(["run", "--example", "9"]) == 1
