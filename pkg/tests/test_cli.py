import json

import numpy as np
import pytest

from odbgrowth.cli import main, parse_range
from odbgrowth.env import Environment


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("1,2,5") == [1.0, 2.0, 5.0]
    with pytest.raises(ValueError):
        parse_range("1:0:0.1")


def test_shape_csv(capsys):
    code, out, _ = run(capsys, "shape", "--dist", "uniform:0,0.5", "--ratios", "0.1,0.5,0.9")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "ratio,c1,c2,regime" and len(lines) == 4
    assert lines[-1].endswith("deterministic")


def test_regime_exit_code(capsys):
    code, out, _ = run(capsys, "shape", "--dist", "uniform:0,1", "--alpha", "1")
    assert code == 0 and json.loads(out)["regime"] == "deterministic"
    code, _, err = run(capsys, "quenched", "--dist", "point:0.6", "--n", "10", "--alpha", "1")
    assert code == 2 and "quenched-deterministic" in err


def test_exact_and_global_flags(capsys, tmp_path):
    env = tmp_path / "env.txt"
    Environment(np.array([0.5, 0.5])).save(env)
    code, out, _ = run(capsys, "exact", "--env", str(env), "--m", "2", "--all")
    assert code == 0
    assert out.splitlines() == ["h,P(H<=h)", "0,0.0625", "1,0.5", "2,1.0"]
    out_path = tmp_path / "x.json"
    code, _, _ = run(capsys, "--json", "--out", str(out_path), "exact", "--env", str(env),
                     "--m", "2", "--h", "1")
    assert json.loads(out_path.read_text()) == {"1": 0.5}


def test_tw2_negative_range(capsys):
    code, out, _ = run(capsys, "tw2", "--s", "-2:2:1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "s,F2,F2_painleve,abs_diff" and len(lines) == 6
    assert all(float(ln.split(",")[3]) < 1e-9 for ln in lines[1:])


def test_tw2_precision_error(capsys):
    code, _, err = run(capsys, "tw2", "--s", "-8", "--nodes", "6")
    assert code == 3 and "precision" in err


def test_simulate_profiles_and_matrix(capsys, tmp_path):
    code, out, _ = run(capsys, "--seed", "3", "simulate", "--dist", "uniform:0,0.5",
                       "--T", "10", "--record", "5,10")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,x,h" and len(lines) == 1 + 6 + 11
    code, again, _ = run(capsys, "simulate", "--seed", "3", "--dist", "uniform:0,0.5",
                         "--T", "10", "--record", "5,10")
    assert again == out
    code, out, _ = run(capsys, "simulate", "--matrix", "--dist", "point:0.5", "--m", "4",
                       "--columns", "3")
    assert code == 0 and json.loads(out)["m"] == 4


def test_experiment_csv(capsys, tmp_path):
    args = ["experiment", "--kind", "quenched_f2", "--dist", "uniform:0,0.5", "--alpha", "1",
            "--m", "30", "--replicas", "4"]
    code, out, _ = run(capsys, *args)
    assert code == 0 and out.splitlines()[0] == "replica,H,statistic,reference"
    code, out3, _ = run(capsys, *args, "--workers", "3")
    assert out3 == out
    code, _, err = run(capsys, "experiment", "--kind", "annealed_normal", "--dist", "point:0.25",
                       "--alpha", "1", "--m", "10")
    assert code == 2


def test_quenched_curves(capsys, tmp_path):
    curves = tmp_path / "c.csv"
    code, out, _ = run(capsys, "quenched", "--dist", "point:0.25", "--n", "20", "--alpha", "1",
                       "--curves", str(curves), "--arclength", "2", "--step", "0.01")
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["c"] - 3 ** 0.5 / 2) < 1e-12
    assert curves.read_text().splitlines()[0] == "x,y,branch"
