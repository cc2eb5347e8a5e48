import numpy as np
import pytest

from levybarrier.cli import main
from levybarrier.config import (ConfigError, parse_config, regime_model_from,
                                serialize_config, sim_config_from)

AUX_CONFIG = """
# single-regime problem on the Brownian model with W_1 = sinh
[levy.base]
drift_mu = 0.0
sigma = 1.4142135623730951
jump_rate = 0.0

[problem]
phi = 2.0
lambda = 0.0
delta = 1.0
payoff_knots = [[0.0, 0.0], [1.0, 1.0]]
payoff_tail_slope = 1.0

[sim]
paths = 20000
dt = 0.002
tmax = 19.0
seed = 3
"""

REGIME_CONFIG = """
[levy.a]
drift_mu = 0.0
sigma = 1.4142135623730951
jump_rate = 0.0

[levy.b]
drift_mu = 0.0
sigma = 1.4142135623730951
jump_rate = 0.0

[chain]
states = ["a", "b"]
switch_rates = [[0.0, 1.0], [1.0, 0.0]]
discounts = [1.0, 1.0]

[problem]
phi = 2.0
delta = 1.0

[solver]
tol = 1e-8
grid_points = 1200

[sim]
paths = 4000
dt = 0.004
tmax = 19.0
seed = 5
"""


@pytest.fixture
def aux_config(tmp_path):
    p = tmp_path / "aux.cfg"
    p.write_text(AUX_CONFIG)
    return p


@pytest.fixture
def regime_config(tmp_path):
    p = tmp_path / "regime.cfg"
    p.write_text(REGIME_CONFIG)
    return p


def _report(out: str) -> dict:
    pairs = {}
    for line in out.splitlines():
        if "=" in line and " " not in line.strip():
            k, _, v = line.partition("=")
            pairs[k] = v
    return pairs


def test_config_round_trip():
    tree = parse_config(AUX_CONFIG)
    assert parse_config(serialize_config(tree)) == tree
    tree2 = parse_config(REGIME_CONFIG)
    assert parse_config(serialize_config(tree2)) == tree2


def test_config_line_anchored_diagnostics():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("[a]\nx = 1\noops\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("x = 1\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("[a]\nx = not!a!literal\n")


def test_regime_model_from_config():
    model = regime_model_from(parse_config(REGIME_CONFIG))
    assert model.states == ("a", "b")
    assert model.phi == 2.0
    assert model.lam(0) == 1.0


def test_sim_config_overrides():
    cfg = sim_config_from(parse_config(AUX_CONFIG), paths=77, seed=9)
    assert cfg.n_paths == 77
    assert cfg.rng_seed == 9
    assert cfg.dt == 0.002


def test_solve_aux_report(aux_config, capsys):
    rc = main(["solve-aux", "--config", str(aux_config)])
    out = capsys.readouterr().out
    assert rc == 0
    rep = _report(out)
    assert float(rep["barrier"]) == pytest.approx(np.arccosh(2.0), abs=1e-5)
    assert float(rep["value_at_zero"]) == pytest.approx(-np.sqrt(3.0),
                                                        abs=1e-9)
    assert float(rep["smooth_fit_barrier_residual"]) <= 1e-8
    assert float(rep["smooth_fit_zero_residual"]) <= 1e-8


def test_solve_aux_csv(aux_config, tmp_path, capsys):
    out_dir = tmp_path / "out"
    rc = main(["solve-aux", "--config", str(aux_config), "--out",
               str(out_dir)])
    capsys.readouterr()
    assert rc == 0
    lines = (out_dir / "value_curve.csv").read_text().splitlines()
    assert lines[0] == "x,V,V_prime,hjb_residual"
    first = lines[1].split(",")
    assert len(first) == 4
    # 17-significant-digit round trip
    assert float(first[1]) == pytest.approx(-np.sqrt(3.0), abs=1e-12)


def test_missing_phi_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(AUX_CONFIG.replace("phi = 2.0\n", ""))
    rc = main(["solve-aux", "--config", str(p)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "problem.phi: required" in err


def test_small_phi_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(AUX_CONFIG.replace("phi = 2.0", "phi = 0.5"))
    rc = main(["solve-aux", "--config", str(p)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "phi must exceed 1" in err


def test_parse_error_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("[levy.base\n")
    rc = main(["solve-aux", "--config", str(p)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "line 1" in err


def test_solver_failure_exit_3(tmp_path, capsys):
    p = tmp_path / "hard.cfg"
    p.write_text(REGIME_CONFIG.replace("tol = 1e-8",
                                       "tol = 1e-15\nmax_iter = 3"))
    rc = main(["solve-regime", "--config", str(p)])
    err = capsys.readouterr().err
    assert rc == 3
    assert "no convergence" in err


def test_solve_regime_collapse(regime_config, tmp_path, capsys):
    out_dir = tmp_path / "out"
    rc = main(["solve-regime", "--config", str(regime_config), "--out",
               str(out_dir)])
    out = capsys.readouterr().out
    assert rc == 0
    rep = _report(out)
    assert float(rep["barrier_a"]) == pytest.approx(np.arccosh(2.0),
                                                    abs=1e-5)
    assert float(rep["barrier_b"]) == pytest.approx(np.arccosh(2.0),
                                                    abs=1e-5)
    assert float(rep["final_rho"]) < 1e-8
    assert "iter=1 rho=" in out
    for s in ("a", "b"):
        lines = (out_dir / f"curve_{s}.csv").read_text().splitlines()
        assert lines[0] == "x,V"


def test_simulate_deterministic_bytes(aux_config, capsys):
    rc1 = main(["simulate", "--config", str(aux_config), "--paths", "2000",
                "--dt", "0.01", "--x0", "0.5"])
    out1 = capsys.readouterr().out
    rc2 = main(["simulate", "--config", str(aux_config), "--paths", "2000",
                "--dt", "0.01", "--x0", "0.5"])
    out2 = capsys.readouterr().out
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert out1.splitlines()[0] == "mean,std_error,analytic"


def test_simulate_matches_analytic(aux_config, capsys):
    rc = main(["simulate", "--config", str(aux_config), "--paths", "20000",
               "--dt", "0.002", "--x0", "0.6"])
    out = capsys.readouterr().out
    assert rc == 0
    mean, se, analytic = map(float, out.splitlines()[1].split(","))
    assert abs(mean - analytic) <= 3.0 * se


def test_curve_csv(aux_config, capsys):
    rc = main(["curve", "--config", str(aux_config)])
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "x,W,Z,Zbar"
    x, w, z, zbar = map(float, lines[-1].split(","))
    assert w == pytest.approx(np.sinh(x), rel=1e-12)
    assert z == pytest.approx(np.cosh(x), rel=1e-12)


def test_verify_all_pass(aux_config, capsys):
    rc = main(["verify", "--config", str(aux_config), "--paths", "20000"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    for name in ("laplace", "smooth_fit_barrier", "smooth_fit_zero",
                 "hjb_interior", "hjb_above", "dominance", "exit_down",
                 "exit_up", "exit_reflected"):
        assert f"PASS {name}" in out


def test_verify_regime_contraction(regime_config, capsys):
    rc = main(["verify", "--config", str(regime_config)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS contraction" in out
