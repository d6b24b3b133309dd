import math
import pathlib

import numpy as np
import pytest

import stockpile

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_params_and_config():
    m = stockpile.ModelParams.baseline()
    assert m.alpha == 1e4 and m.k_max == 0.05
    a = stockpile.ModelParams.appendix()
    assert a.k_max == 0.07 and a.g_coeff == 10.0
    cfg = stockpile.load_config(str(CONFIGS / "appendix.cfg"))
    assert cfg["params"].k_max == 0.07
    with pytest.raises(ValueError):
        bad = stockpile.ModelParams()
        bad.r = -1.0
        bad.validate()


def test_asymptotics_values():
    d = stockpile.asymptotics(stockpile.ModelParams(), 0.5)
    assert d["V0"] == pytest.approx(-906.666666667, rel=1e-10)
    assert d["p0"] == pytest.approx(343.333333333, rel=1e-10)
    assert d["uniqueness_condition"] == pytest.approx(19.0)
    assert d["feasible"]
    assert abs(d["smooth_ansatz_residual"]) > 1.0


def test_coarse_solve_policy_and_paths():
    m = stockpile.ModelParams()
    sol = stockpile.solve(m, 12, 12, dt=3e-3)
    assert sol["converged"]
    assert sol["U"].shape == (13, 13)
    assert np.isfinite(sol["P"]).all()

    again = stockpile.solve(m, 12, 12, dt=3e-3, U0=sol["U"], P0=sol["P"])
    assert again["iterations"] == 0

    pol = stockpile.policy(m, sol["U"], sol["P"])
    assert pol["q_star"].shape == (13, 13)
    assert len(pol["shock_z"]) == 13

    path = stockpile.simulate(m, sol["U"], sol["P"], 0.0, 0.5, T=2.0)
    assert path.shape == (2001, 5)
    assert (path[:, 1] >= 0.0).all() and (path[:, 1] <= 0.05).all()
    n1 = stockpile.simulate(m, sol["U"], sol["P"], 0.0, 0.5, T=1.0, seed=4)
    n2 = stockpile.simulate(m, sol["U"], sol["P"], 0.0, 0.5, T=1.0, seed=4)
    assert np.array_equal(n1, n2)


def test_bad_shapes_raise():
    m = stockpile.ModelParams()
    with pytest.raises(ValueError):
        stockpile.policy(m, np.zeros((5, 5)), np.zeros((5, 6)))
    with pytest.raises(ValueError):
        stockpile.solve(m, 1, 10, dt=1e-3)


def test_constant_fringe_boundary_price():
    m = stockpile.ModelParams()
    out = stockpile.solve_constant_fringe(m, 0.58, 40, dt=2e-3)
    assert out["converged"]
    assert out["P"][0] == pytest.approx(176.666666667, rel=1e-6)
    assert math.isfinite(out["U"][-1])
