import csv
import json

import pytest

from sosbound.cli import main, parse_seeds
from sosbound.operators import SpinfulHamiltonian


def test_parse_seeds():
    assert parse_seeds("3") == [3]
    assert parse_seeds("0:4") == [0, 1, 2, 3]
    assert parse_seeds("1,4,9") == [1, 4, 9]


def test_generate_then_solve_from_file(tmp_path, capsys):
    path = tmp_path / "h.json"
    assert main(["generate", "--n-o", "4", "--epsilon", "0.01", "--seeds", "2", "--out", str(path)]) == 0
    H = SpinfulHamiltonian.from_json(path.read_text())
    assert H.n_o == 4
    assert main(["solve", "--input", str(path), "--format", "json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["converged"] and res["certified_bound"] <= res["bound"]


def test_exact_and_pt(capsys):
    assert main(["exact", "--n-o", "2", "--epsilon", "0", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["exact"] == -2.0
    assert main(["pt", "--n-o", "2", "--epsilon", "0.01"]) == 0
    assert capsys.readouterr().out.startswith("pt0,pt1,pt2,pt3")


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--n-o", "2", "--epsilon", "0,0.01", "--seeds", "0:3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert json.loads(capsys.readouterr().err)["records"] == 6


def test_nonconverged_sweep_still_exits_zero(tmp_path):
    out = tmp_path / "s.json"
    args = ["sweep", "--n-o", "4", "--epsilon", "0.04", "--seeds", "0", "--max-iter", "2", "--format", "json"]
    assert main(args + ["--out", str(out)]) == 0
    assert json.loads(out.read_text())[0]["result"]["converged"] is False


def test_toy_and_dressed(capsys):
    assert main(["toy", "--epsilon", "1"]) == 0
    assert "-0.25" in capsys.readouterr().out
    assert main(["toy", "--mode", "general", "--epsilon", "5,20"]) == 0
    assert capsys.readouterr().out.strip().endswith("False")
    assert main(["dressed", "--n", "4", "--epsilon", "0.01,0.02"]) == 0
    assert capsys.readouterr().out.startswith("epsilon,residual_o1,residual_o2,sector_residual")


def test_error_exit_codes(tmp_path):
    assert main(["solve", "--input", str(tmp_path / "missing.json")]) == 1
    assert main(["generate", "--n-o", "3"]) == 2
    assert main(["solve", "--damping", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code != 0
