import json
import math

import pytest

from jbsde.cli import main


def write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def entropic_config(tmp_path, outdir):
    return write_config(tmp_path, "entropic.json", {
        "model": {"T": 1.0, "steps": 100, "marks": [1.0], "weights": [1.0],
                  "terminal": {"kind": "jump_count"}},
        "generator": {"kind": "entropic", "params": {"alpha": 1.0}},
        "solver": {"backend": "lattice"},
        "output": {"dir": str(outdir), "prefix": "run"},
    })


def test_solve_writes_outputs_and_is_reproducible(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = entropic_config(tmp_path, out)
    assert main(["solve", cfg]) == 0
    first = (out / "run_result.json").read_text()
    first_csv = (out / "run_summary.csv").read_text()
    assert main(["solve", cfg]) == 0
    assert (out / "run_result.json").read_text() == first
    assert (out / "run_summary.csv").read_text() == first_csv
    y0 = json.loads(first)["Y0"]
    assert abs(y0 - (math.e - 1.0)) < 1e-12
    assert "Y0" in capsys.readouterr().out


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {
        "model": {"T": 1.0, "steps": 10, "oops": True},
        "generator": {"kind": "entropic", "params": {"alpha": 1.0}},
        "solver": {}, "output": {}})
    assert main(["solve", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.json")]) == 2
    capsys.readouterr()


def test_solver_failure_exits_1(tmp_path, capsys):
    # per-step jump probability >= 1: rejected by the simulator
    cfg = write_config(tmp_path, "coarse.json", {
        "model": {"T": 1.0, "steps": 2, "marks": [1.0], "weights": [10.0],
                  "terminal": {"kind": "jump_count"}},
        "generator": {"kind": "entropic", "params": {"alpha": 1.0}},
        "solver": {"backend": "lsmc", "n_paths": 50},
        "output": {"dir": str(tmp_path / "o")}})
    assert main(["solve", cfg]) == 1
    assert "solver error" in capsys.readouterr().err


def test_utility_power(tmp_path, capsys):
    cfg = write_config(tmp_path, "pow.json", {
        "model": {"T": 1.0, "steps": 100,
                  "terminal": {"kind": "constant", "value": 1.0}},
        "generator": {"kind": "power_transformed",
                      "params": {"gamma": 0.5, "phi": 0.2}},
        "solver": {"backend": "lattice"},
        "market": {"d": 1, "k": 1, "sigma": [[1.0]], "phi": 0.2,
                   "gamma": 0.5},
        "output": {"dir": str(tmp_path / "o"), "prefix": "pow"}})
    assert main(["utility", cfg]) == 0
    out = capsys.readouterr().out
    assert "power utility" in out
    assert "0.4" in out


def test_utility_needs_market(tmp_path, capsys):
    out = tmp_path / "o"
    cfg = entropic_config(tmp_path, out)
    assert main(["utility", cfg]) == 2
    capsys.readouterr()


def test_gooddeal_bounds_order(tmp_path, capsys):
    cfg = write_config(tmp_path, "gd.json", {
        "model": {"T": 1.0, "steps": 30, "marks": [0.8, -0.3],
                  "weights": [0.5, 0.6],
                  "terminal": {"kind": "weighted_jump_count",
                               "coeffs": [0.4, -0.2]}},
        "generator": {"kind": "gooddeal",
                      "params": {"K": 1.0, "phi": 0.0, "sigma": [[1.0]]}},
        "solver": {"backend": "lattice"},
        "market": {"d": 1, "k": 1, "sigma": [[1.0]], "phi": 0.0, "K": 1.0},
        "output": {"dir": str(tmp_path / "o"), "prefix": "gd"}})
    assert main(["gooddeal", cfg]) == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "o" / "gd_bounds.json").read_text())
    assert payload["lower"] <= payload["upper"]


def test_demo_stdout_bit_reproducible(capsys):
    assert main(["demo", "royer"]) == 0
    first = capsys.readouterr().out
    assert main(["demo", "royer"]) == 0
    assert capsys.readouterr().out == first
    assert first.startswith("n,I1,I2,lower_bound")


def test_demo_writes_file(tmp_path, capsys):
    out = tmp_path / "nc.csv"
    assert main(["demo", "nonconvex", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("u,f")
    capsys.readouterr()


def test_demo_growth(capsys):
    assert main(["demo", "growth"]) == 0
    assert capsys.readouterr().out.startswith("psi,u_max,sup_ratio")
