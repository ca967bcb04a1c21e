import json

import numpy as np
import pytest

from qctrlkit.cli import EXIT_CONFIG, EXIT_IO, main
from qctrlkit.io import control_from_dict, read_csv


@pytest.fixture
def cpmg_file(tmp_path):
    out = tmp_path / "cpmg.json"
    assert main(["scenario", "build", "cpmg", "--params", '{"order":4,"duration":3e-6}', "--out", str(out)]) == 0
    return out


def test_scenario_build_validates(cpmg_file):
    data = json.loads(cpmg_file.read_text())
    ctrl, noise = control_from_dict(data)
    assert ctrl.duration == 3e-6 and len(noise) == 1
    manifest = json.loads((cpmg_file.parent / "cpmg.json.manifest.json").read_text())
    assert manifest["command"] == "scenario" and "tool_version" in manifest


def test_scenario_list(capsys):
    assert main(["scenario", "list"]) == 0
    assert "crosstalk" in capsys.readouterr().out


def test_unknown_subcommand_usage(capsys):
    assert main(["bogus"]) == EXIT_CONFIG
    assert "usage" in capsys.readouterr().err


def test_missing_seed_is_usage_error(cpmg_file, tmp_path, capsys):
    code = main(["simulate", "--control", str(cpmg_file), "--out", str(tmp_path / "s.csv")])
    assert code == EXIT_CONFIG
    assert "--seed" in capsys.readouterr().err


def test_simulate_byte_identical(cpmg_file, tmp_path):
    noise = tmp_path / "noise.json"
    noise.write_text(json.dumps({"channels": [{
        "coupling": "additive", "operator": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
        "psd": {"samples": [1e3] * 20, "resolution": 2 * np.pi * 1e5}}]}))
    outs = []
    for k in range(2):
        out = tmp_path / f"s{k}.csv"
        args = ["simulate", "--control", str(cpmg_file), "--noise", str(noise), "--trials", "4",
                "--points", "11", "--seed", "5", "--out", str(out)]
        assert main(args) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    header, data = read_csv(tmp_path / "s0.csv")
    assert header[0] == "time [s]" and data.shape == (11, 3)
    np.testing.assert_allclose(data[:, 1:].sum(axis=1), 1, atol=1e-12)
    rho = json.loads((tmp_path / "s0.csv.density.json").read_text())
    assert rho["trials"] == 4


def test_filter_function_command(cpmg_file, tmp_path):
    out = tmp_path / "ff.csv"
    assert main(["--hz", "filter-function", "--control", str(cpmg_file), "--max-frequency", "2e6",
                 "--points", "21", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["angular frequency [rad/s]", "filter function [s^2]"]
    assert np.isclose(data[-1, 0], 2 * np.pi * 2e6)
    assert np.all(data[:, 1] >= 0)


def test_bad_params_and_missing_file(tmp_path):
    assert main(["scenario", "build", "cpmg", "--params", "[1, 2]", "--out", str(tmp_path / "x.json")]) \
        == EXIT_CONFIG
    assert main(["scenario", "build", "nope", "--out", str(tmp_path / "x.json")]) == EXIT_CONFIG
    assert main(["optimize", "--problem", str(tmp_path / "missing.json"), "--seed", "0",
                 "--out", str(tmp_path / "o.json")]) == EXIT_IO


def test_optimize_command(tmp_path):
    from qctrlkit.optimizer import CostGraph

    g = CostGraph()
    amp = g.variables(1, 0.0, 10.0)
    H = g.drive(g.pwc(amp, 1.0), [[0, 0], [0.5, 0]])
    g.set_output(g.optimal_cost(H, [[0, 1], [1, 0]]))
    problem = tmp_path / "p.json"
    problem.write_text(json.dumps({"type": "problem", "graph": g.to_dict(), "starts": 2}))
    out = tmp_path / "o.json"
    assert main(["optimize", "--problem", str(problem), "--seed", "1", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["cost"] < 1e-8 and len(res["history"]) == 2


def test_identify_synthetic(tmp_path):
    exps = tmp_path / "e.json"
    assert main(["scenario", "build", "sysid", "--params", '{"points": 20}', "--out", str(exps)]) == 0
    out = tmp_path / "id.json"
    assert main(["identify", "--experiments", str(exps), "--synthetic-sigma", "0.01", "--starts", "30",
                 "--seed", "2", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    truth = json.loads(exps.read_text())["truth"]
    np.testing.assert_allclose(res["theta"], truth, rtol=0.05)


def test_reconstruct_command(tmp_path):
    from qctrlkit.io import write_csv

    rng = np.random.default_rng(0)
    F = rng.uniform(0, 1, (6, 4))
    S = np.array([1.0, 2.0, 3.0, 4.0])
    write_csv(tmp_path / "F.csv", [f"f{k}" for k in range(4)], F)
    write_csv(tmp_path / "I.csv", ["infidelity [1]"], (F @ S)[:, None])
    (tmp_path / "part.json").write_text(json.dumps({"bands": [[0.0, 3.0, 4]]}))
    out = tmp_path / "r.csv"
    assert main(["reconstruct", "--sensitivity", str(tmp_path / "F.csv"), "--infidelities",
                 str(tmp_path / "I.csv"), "--partition", str(tmp_path / "part.json"), "--out", str(out)]) == 0
    _, data = read_csv(out)
    np.testing.assert_allclose(data[:, 2], S, rtol=1e-8)
