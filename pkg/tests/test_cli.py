import csv
import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from te_mdp.cli import main
from te_mdp.io import read_policy, read_scenario
from te_mdp.product import value_iteration_reach

SCENARIOS = Path(__file__).resolve().parents[1] / "demos" / "scenarios"
SWITCH = str(SCENARIOS / "switch.json")
OBSTACLE = str(SCENARIOS / "moving_obstacle.json")


def run(*argv):
    return main([str(a) for a in argv])


def test_compile_reports_sizes(tmp_path, capsys):
    out = tmp_path / "obstacle.npz"
    assert run("compile", "--scenario", OBSTACLE, "--out", out) == 0
    text = capsys.readouterr().out
    assert "|S| = 3 (accepting [1])" in text
    assert "|X| = 105" in text and "|U| = 5" in text
    assert out.exists()
    assert run("compile", "--scenario", OBSTACLE, "--out", tmp_path / "again.npz") == 0
    assert capsys.readouterr().out.replace("again", "obstacle") == text


def test_malformed_formula_exit_code(tmp_path, capsys):
    d = json.loads(Path(SWITCH).read_text())
    d["formula"] = "F (goal"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert run("compile", "--scenario", p) == 2
    assert "position 7" in capsys.readouterr().err


def test_bad_row_exit_code(tmp_path, capsys):
    d = json.loads(Path(SWITCH).read_text())
    d["mdp"]["transition"][1][1] = [0.0, 0.3, 0.3, 0.0, 0.0, 0.0]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert run("compile", "--scenario", p) == 2
    assert "row (wait|left, b)" in capsys.readouterr().err
    assert run("solve", "--scenario", tmp_path / "missing.json", "--out", tmp_path / "p.json") == 2


def test_solve_beta_zero_matches_value_iteration(tmp_path):
    out = tmp_path / "p.json"
    assert run("solve", "--scenario", SWITCH, "--beta", 0, "--out", out) == 0
    _, d = read_policy(out)
    sc = read_scenario(SWITCH)
    pm = sc.product()
    h, _ = value_iteration_reach(pm, sc.horizon)
    assert abs(d["meta"]["failure_probability"] - (1 - h[sc.horizon, pm.initial])) <= 1e-9
    report = json.loads((tmp_path / "p.report.json").read_text())
    assert report["converged"] and report["failure_probability"] == d["meta"]["failure_probability"]


def test_solve_huge_beta_has_no_information(tmp_path):
    out = tmp_path / "p.json"
    assert run("solve", "--scenario", SWITCH, "--beta", 1e6, "--out", out) == 0
    assert read_policy(out)[1]["meta"]["transfer_entropy_nats"] <= 1e-6


def test_repeated_runs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run("solve", "--scenario", SWITCH, "--memory", 1, "--seed", 7, "--out", tmp_path / f"{name}.json") == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.report.json").read_bytes() == (tmp_path / "b.report.json").read_bytes()


def test_non_convergence_exit_code(tmp_path):
    assert run("solve", "--scenario", OBSTACLE, "--max-iters", 2, "--out", tmp_path / "p.json") == 3
    assert not read_policy(tmp_path / "p.json")[1]["meta"]["converged"]


def test_target_prob(tmp_path):
    out = tmp_path / "p.json"
    assert run("solve", "--scenario", SWITCH, "--target-prob", 0.95, "--out", out) == 0
    meta = read_policy(out)[1]["meta"]
    assert meta["target_prob"] == 0.95 and meta["failure_probability"] <= 0.05 + 1e-6  # feasibility slack
    assert run("solve", "--scenario", SWITCH, "--target-prob", 0.9999, "--out", out) == 4


def test_sweep_table(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("sweep", "--scenario", SWITCH, "--beta-min", 0.01, "--beta-max", 100, "--points", 9, "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9
    te = np.array([float(r["te_bits"]) for r in rows])
    fail = np.array([float(r["failure_probability"]) for r in rows])
    assert np.all(np.diff(te) <= 1e-9) and np.all(np.diff(fail) >= -1e-9)
    assert np.allclose(te * np.log(2), [float(r["te_nats"]) for r in rows])
    # endpoints agree with a single solve at the same beta
    assert run("solve", "--scenario", SWITCH, "--beta", 100.0, "--out", tmp_path / "p.json") == 0
    meta = read_policy(tmp_path / "p.json")[1]["meta"]
    assert abs(meta["failure_probability"] - fail[-1]) < 1e-7
    assert abs(meta["transfer_entropy_bits"] - te[-1]) < 1e-7


def test_export_marginals(tmp_path):
    pol = tmp_path / "p.json"
    assert run("solve", "--scenario", OBSTACLE, "--beta", 0, "--out", pol) == 0
    out = tmp_path / "m.csv"
    assert run("export-marginals", "--scenario", OBSTACLE, "--policy", pol, "--times", "0,16,25", "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["t"] for r in rows} == {"0", "16", "25"}
    for t in ("0", "16", "25"):
        assert abs(sum(float(r["probability"]) for r in rows if r["t"] == t) - 1) < 1e-8
    start = [r for r in rows if r["t"] == "0" and float(r["probability"]) > 0]
    assert len(start) == 1 and (start[0]["cell_x"], start[0]["cell_y"]) == ("4", "6")
    assert run("export-marginals", "--scenario", OBSTACLE, "--policy", pol, "--times", "26") == 2
    assert run("export-marginals", "--scenario", SWITCH, "--policy", pol) == 2


def test_eval_reproduces_solve(tmp_path, capsys):
    pol = tmp_path / "p.json"
    assert run("solve", "--scenario", SWITCH, "--beta", 0.5, "--out", pol) == 0
    meta = read_policy(pol)[1]["meta"]
    capsys.readouterr()
    assert run("eval", "--scenario", SWITCH, "--policy", pol) == 0
    ev = json.loads(capsys.readouterr().out)
    assert abs(ev["objective"] - meta["objective"]) < 1e-12
    assert abs(ev["transfer_entropy_bits"] - meta["transfer_entropy_bits"]) < 1e-12
    assert ev["optimal_failure_probability"] <= ev["failure_probability"]


def test_product_cache_is_used(tmp_path):
    cache = tmp_path / "c.npz"
    assert run("compile", "--scenario", SWITCH, "--out", cache) == 0
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("solve", "--scenario", SWITCH, "--product-cache", cache, "--out", a) == 0
    assert run("solve", "--scenario", SWITCH, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.skipif(shutil.which("te-mdp") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["te-mdp", "compile", "--scenario", SWITCH, "--out", str(tmp_path / "c.npz")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "|S| = 2" in res.stdout
