import json
import math

import pytest

from gapcert import bounds
from gapcert.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def systems(tmp_path):
    return {
        "p1": write(tmp_path, "p1.json", {"type": "tf", "num": [1], "den": [1, 1]}),
        "p2": write(tmp_path, "p2.json", {"type": "tf", "num": [1], "den": [1, 2]}),
        "unstable": write(tmp_path, "u.json", {"type": "tf", "num": [1], "den": [1, -1]}),
        "k": write(tmp_path, "k.json", {"type": "ss", "A": [], "B": [], "C": [], "D": [[1.0]]}),
        "bad": write(tmp_path, "bad.json", {"type": "zpk"}),
    }


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_gap_command(systems, capsys):
    assert main(["gap", systems["p1"], systems["p2"]]) == 0
    assert abs(out_json(capsys)["value"] - 1 / math.sqrt(10)) < 1e-4


def test_bpc_command(systems, capsys):
    assert main(["bpc", systems["p1"], systems["k"]]) == 0
    assert abs(out_json(capsys)["b"] - 1 / math.sqrt(2)) < 1e-6


def test_hinf_exit_codes(systems, capsys):
    assert main(["hinf", systems["p1"]]) == 0
    assert abs(out_json(capsys)["hinf_norm"] - 1.0) < 1e-5
    assert main(["hinf", systems["unstable"]]) == 3


def test_nrcf_command(systems, capsys):
    assert main(["nrcf", systems["unstable"]]) == 0
    out = out_json(capsys)
    assert out["inner_residual"] < 1e-7 and out["bezout"]["residual"] < 1e-6


def test_bad_input(systems, tmp_path):
    assert main(["gap", systems["bad"], systems["p1"]]) == 1
    assert main(["gap", str(tmp_path / "missing.json"), systems["p1"]]) == 1
    assert main(["bounds", "scenario-size", "beta"]) == 1
    assert main(["bounds", "scenario-size", "beta=0.01", "eps=2"]) == 1


def test_bounds_command(capsys):
    assert main(["bounds", "scenario-size", "beta=0.01", "eps=0.05"]) == 0
    assert out_json(capsys)["value"] == 90
    assert main(["bounds", "scenario-cert", "alpha_hat=0.95", "b=0.8944", "n=10000", "beta=0.01", "eps=0.05"]) == 3


def test_experiment_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["experiment", "experiment-1", "--samples", "120", "--out", str(out), "--histogram"]) == 0
    capsys.readouterr()
    lines = (out / "samples.csv").read_text().splitlines()
    assert lines[0] == "index,theta_1,theta_2,gap,stable,bpc,tnorm" and len(lines) == 121
    assert (out / "histogram.svg").read_text().startswith("<svg")
    summary = json.loads((out / "summary.json").read_text())
    for rep in summary["bounds"].values():
        val = rep["value"]
        if isinstance(val, str):
            continue
        assert abs(bounds.reevaluate(rep) - val) <= 1e-12 * max(1.0, abs(val))


def test_experiment_list(capsys):
    assert main(["experiment", "--list"]) == 0
    assert "experiment-1" in capsys.readouterr().out
