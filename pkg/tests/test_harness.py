import math
import subprocess
import sys

import numpy as np
import pytest

from mzsampling.errors import ConfigError, DegenerateFitError
from mzsampling.harness import experiments
from mzsampling.harness.cli import main
from mzsampling.harness.config import ExperimentConfig, build_config, parse_degrees, read_config_file
from mzsampling.harness.experiments import fit_rate, run_approx_experiment
from mzsampling.mzfamily import generate_uniform, write_nodes


@pytest.mark.parametrize(
    "text, expected",
    [
        ("8,16,32", (8, 16, 32)),
        ("dyadic:8:256", (8, 16, 32, 64, 128, 256)),
        ("range:4:16:4", (4, 8, 12, 16)),
        ([2, 3], (2, 3)),
    ],
)
def test_parse_degrees(text, expected):
    assert parse_degrees(text) == expected


@pytest.mark.parametrize(
    "overrides",
    [
        {"basis": "hermite"},
        {"degrees": "8,4"},
        {"degrees": "a,b"},
        {"jitter": "0.5"},
        {"oversampling": "0.5"},
        {"function": "gauss"},
        {"sigma": "0.5"},
        {"basis": "legendre", "sigma": "0.9"},
        {"function": "hat", "sigma": "1.6"},
        {"function": "sobolev", "fsigma": "1.0"},
        {"seed": "x"},
        {"bogus": "1"},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        build_config({}, overrides)


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\nbasis = chebyshev\ndegrees = dyadic:4:16\nseed = 3  # trailing\nstrict = yes\n")
    values = read_config_file(path)
    cfg = build_config(values, {"seed": 9, "function": None})
    assert cfg.basis == "chebyshev" and cfg.degrees == (4, 8, 16)
    assert cfg.seed == 9 and cfg.strict is True
    assert cfg.function == ExperimentConfig.function


def test_node_path_as_generator(tmp_path):
    path = tmp_path / "nodes.csv"
    cfg = build_config({}, {"generator": str(path)})
    assert cfg.generator == "file" and cfg.node_file == str(path)


def test_rate_kind():
    assert build_config({}, {"function": "analytic"}).rate_kind == "geometric"
    assert build_config({}, {"function": "hat"}).rate_kind == "algebraic"


def test_fit_rate_algebraic_and_geometric():
    ns = np.array([8, 16, 32, 64])
    fit = fit_rate(ns, 3.0 * ns**-1.5, "algebraic")
    assert fit.slope == pytest.approx(-1.5) and fit.residual < 1e-12
    ns = np.arange(4, 60, 4)
    errs = 2.0 ** -ns
    fit = fit_rate(ns, errs, "geometric", 1e-13)
    assert fit.slope == pytest.approx(-math.log10(2))
    assert fit.points == int(np.sum(errs >= 1e-13))


def test_fit_rate_needs_points():
    with pytest.raises(DegenerateFitError):
        fit_rate([1, 2, 3], [1e-16, 1e-15, float("nan")], "algebraic")


def run_cli(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


def test_cli_approx_writes_csv(tmp_path):
    code, out = run_cli(["approx", "--degrees", "4,8,16", "--generator", "jittered", "--oversampling", "2"], tmp_path)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(experiments.CONVERGENCE_COLUMNS)
    assert [int(line.split(",")[0]) for line in lines[1:]] == [4, 8, 16]
    fit = (tmp_path / "out.fit.csv").read_text().splitlines()
    assert fit[0].startswith("quantity,kind,slope") and len(fit) == 3


@pytest.mark.parametrize("cmd", ["frame", "quad", "weyl", "gen-nodes"])
def test_cli_subcommands(cmd, tmp_path):
    code, out = run_cli([cmd, "--basis", "legendre", "--degrees", "dyadic:4:32"], tmp_path)
    assert code == 0 and out.read_text().count("\n") > 4


def test_cli_rules_out(tmp_path):
    rules = tmp_path / "rules.csv"
    code, _ = run_cli(["quad", "--degrees", "2,4", "--rules-out", str(rules)], tmp_path)
    assert code == 0 and rules.read_text().startswith("n,k,x,w_re,w_im\n")


def test_cli_config_error(tmp_path):
    assert run_cli(["approx", "--jitter", "0.7"], tmp_path)[0] == 4
    assert run_cli(["approx", "--config", str(tmp_path / "missing.cfg")], tmp_path)[0] == 4


def test_cli_node_file_round_trip(tmp_path):
    code, nodes = run_cli(["gen-nodes", "--generator", "random", "--oversampling", "4", "--degrees", "4,8"], tmp_path, "n.csv")
    assert code == 0
    code, out = run_cli(["approx", "--generator", str(nodes), "--degrees", "4,8"], tmp_path)
    assert code == 0
    code, _ = run_cli(["approx", "--generator", str(nodes), "--degrees", "4,16"], tmp_path)
    assert code == 4


def _degenerate_node_file(path):
    good = generate_uniform("fourier", 2)
    bad = generate_uniform("fourier", 3)
    nodes = bad.nodes.copy()
    nodes[4] = nodes[3]
    write_nodes([good, type(bad)(3, nodes, bad.tau)], path)


def test_cli_uncertified_layer(tmp_path):
    path = tmp_path / "nodes.csv"
    _degenerate_node_file(path)
    args = ["approx", "--generator", str(path), "--degrees", "2,3"]
    code, out = run_cli(args, tmp_path)
    assert code == 0
    row = out.read_text().splitlines()[2].split(",")
    assert row[-1] == "0" and row[5] == "nan"
    assert run_cli(args + ["--strict"], tmp_path)[0] == 3


def test_cli_violation_exit(tmp_path, monkeypatch):
    real = experiments._row

    def broken(cfg, basis, f, layer):
        row, _ = real(cfg, basis, f, layer)
        return row, [f"n={layer.n}: lsq_sobolev"]

    monkeypatch.setattr(experiments, "_row", broken)
    assert run_cli(["approx", "--degrees", "2,4"], tmp_path)[0] == 2


def test_report_api():
    rep = run_approx_experiment(build_config({}, {"degrees": "4,8,16", "function": "sobolev"}))
    assert rep.ok and not rep.uncertified
    assert set(rep.fits) == {"err_proj", "err_lsq"}


@pytest.mark.parametrize("cmd", ["approx", "quad", "weyl", "frame"])
def test_cli_deterministic(cmd, tmp_path):
    args = [cmd, "--generator", "random", "--oversampling", "4", "--seed", "7", "--degrees", "dyadic:4:32"]
    _, a = run_cli(args, tmp_path, "a.csv")
    _, b = run_cli(args, tmp_path, "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "mzsampling", "frame", "--degrees", "2,4"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "n,L_n,A_n,B_n,kappa_n,certified"


def test_uniform_analytic_rate():
    cfg = build_config({}, {"function": "analytic", "degrees": "range:4:128:4"})
    fit = run_approx_experiment(cfg).fits["err_lsq"]
    assert abs(fit.slope / -math.log10(2) - 1) <= 0.15


def test_uniform_sobolev_rate():
    cfg = build_config({}, {"function": "sobolev", "degrees": "dyadic:8:256"})
    rep = run_approx_experiment(cfg)
    assert rep.fits["err_lsq"].slope <= -0.6 and rep.ok


def test_quad_sobolev_rows_bounded():
    cfg = build_config({}, {"function": "sobolev", "generator": "jittered", "oversampling": 2, "seed": 7,
                            "degrees": "dyadic:4:64"})
    rep = experiments.run_quad_experiment(cfg)
    assert rep.ok
    assert all(r["quad_err"] <= r["bound_eq19"] for r in rep.rows)
