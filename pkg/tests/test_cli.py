import json
import subprocess
import sys

import numpy as np
import pytest

from cliffconn.blades import Signature
from cliffconn.cli import main, render
from cliffconn.exact import RationalMatrix
from cliffconn.representation import periodicity_rep


def run(*argv):
    return render(list(argv))


def test_epsilons_example():
    out = run("epsilons", "--s", "0", "--t", "1")
    assert out.code == 0
    assert out.text == '{"signs": [1, -1], "exact_identity": true}\n'


def test_prolong_example():
    out = run("prolong", "--s", "0", "--t", "2", "--m", "1", "--flavor", "clifford")
    assert out.code == 0
    assert json.loads(out.text) == {"dim_g1": 0}


def test_prolong_cliffordian_basis():
    out = run("prolong", "--s", "0", "--t", "2", "--flavor", "cliffordian", "--basis")
    blob = json.loads(out.text)
    assert blob["dim_g1"] == 4 and len(blob["basis"]) == 4
    pretty = run("prolong", "--s", "0", "--t", "2", "--flavor", "cliffordian", "--basis", "--emit", "pretty")
    assert "dim g1 = 4" in pretty.text and "t4 =" in pretty.text


def test_rep_cl30_matrices():
    out = run("rep", "--s", "3", "--t", "0", "--kind", "periodicity", "--emit", "json")
    assert out.code == 0
    blob = json.loads(out.text)
    assert (blob["s"], blob["t"], blob["kind"]) == (3, 0, "periodicity")
    assert blob["blades"][:4] == ["E", "J1", "J2", "J3"]
    rep = periodicity_rep(Signature(3, 0))
    got = [RationalMatrix.from_json(m) for m in blob["matrices"]]
    assert got == list(rep.matrices)
    assert [RationalMatrix.from_json(m) for m in blob["tensor_basis"]] == list(rep.tensor_basis)


def test_rep_pretty_and_csv():
    pretty = run("rep", "--s", "0", "--t", "1", "--emit", "pretty")
    assert "I1" in pretty.text and ". +" in pretty.text
    csv_out = run("rep", "--s", "0", "--t", "1", "--emit", "csv")
    lines = csv_out.text.splitlines()
    # nonzero entries only
    assert lines == ["blade,row,col,value", "E,0,0,1", "E,1,1,1", "I1,0,1,1", "I1,1,0,-1"]


def test_verify_and_classify():
    out = run("verify", "--s", "2", "--t", "1")
    assert out.code == 0 and json.loads(out.text)["ok"]
    assert len(json.loads(out.text)["reports"]) == 3
    cl = run("classify", "--s", "0", "--t", "4")
    assert json.loads(cl.text)["factors"] == [[2, 0], [0, 2]]
    assert "case b" in run("classify", "--s", "0", "--t", "4", "--emit", "pretty").text


def test_sxi_command():
    out = run("sxi", "--s", "0", "--t", "2")
    blob = json.loads(out.text)
    assert out.code == 0 and blob["ok"] and blob["injectivity_rank"] == blob["km"] == 4


def test_epsilons_csv():
    out = run("epsilons", "--s", "0", "--t", "2", "--emit", "csv")
    assert out.text.splitlines() == ["blade,sign", "E,1", "I1,-1", "I2,-1", "I1I2,-1"]


def test_planar_demo_json_and_csv():
    out = run("planar-demo", "--s", "0", "--t", "2", "--seed", "7")
    blob = json.loads(out.text)
    assert out.code == 0
    assert blob["planar"] and blob["preserves_structure"] and blob["torsion_unchanged"]
    assert blob["geodesic_max_residual"] <= 1e-7
    assert blob["forced_min_residual"] >= 0
    csv_out = run("planar-demo", "--s", "0", "--t", "2", "--seed", "7", "--emit", "csv", "--step", "0.01")
    lines = csv_out.text.splitlines()
    assert lines[0].startswith("t,x1,") and lines[0].endswith(",residual")
    assert len(lines) == 102
    assert max(float(r.split(",")[-1]) for r in lines[1:]) <= 1e-7


def test_report_epsilon_table_matches_committed_file():
    from pathlib import Path

    committed = (Path(__file__).resolve().parents[1] / "tables" / "epsilon_identity_table.json").read_text()
    assert run("report", "--epsilon-table", "4").text == committed


@pytest.mark.parametrize(
    "argv",
    [
        ["rep", "--s", "1", "--t", "0", "--bogus"],
        ["rep", "--s", "1"],
        ["nonsense"],
        [],
        ["rep", "--s", "-1", "--t", "0"],
        ["rep", "--s", "0", "--t", "0"],
        ["classify", "--s", "0", "--t", "0"],
        ["prolong", "--s", "0", "--t", "1", "--m", "0"],
        ["prolong", "--s", "0", "--t", "1", "--flavor", "quaternionic"],
        ["verify", "--s", "1", "--t", "0", "--emit", "csv"],
        ["planar-demo", "--s", "0", "--t", "1", "--step", "0"],
        ["rep", "--s", "1", "--t", "0", "--emit", "xml"],
    ],
)
def test_usage_errors_exit_two(argv):
    out = render(argv)
    assert out.code == 2
    assert out.text == ""
    assert out.error.startswith("error:")


def test_scalar_algebra_message():
    assert "scalar algebra" in run("classify", "--s", "0", "--t", "0").error


def test_failed_check_exits_one():
    # a tolerance no float computation can meet
    out = run("planar-demo", "--s", "0", "--t", "1", "--tol", "-1")
    assert out.code == 1
    assert json.loads(out.text)["planar"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["rep", "--s", "2", "--t", "2", "--kind", "right-regular"],
        ["prolong", "--s", "1", "--t", "1", "--flavor", "cliffordian", "--basis"],
        ["planar-demo", "--s", "1", "--t", "0", "--seed", "3", "--emit", "csv", "--step", "0.01"],
    ],
)
def test_output_is_deterministic(argv):
    assert render(argv) == render(argv)


def test_main_writes_out_file(tmp_path, capsys):
    target = tmp_path / "eps.json"
    assert main(["epsilons", "--s", "0", "--t", "1", "--out", str(target)]) == 0
    assert target.read_text() == '{"signs": [1, -1], "exact_identity": true}\n'
    assert capsys.readouterr().out == ""


def test_main_streams(capsys):
    assert main(["classify", "--s", "0", "--t", "0"]) == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "scalar algebra" in captured.err
    assert main(["prolong", "--s", "0", "--t", "2"]) == 0
    assert json.loads(capsys.readouterr().out) == {"dim_g1": 0}


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "planar-demo" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cliffconn", "epsilons", "--s", "0", "--t", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == '{"signs": [1, -1], "exact_identity": true}\n'
    bad = subprocess.run([sys.executable, "-m", "cliffconn", "rep", "--x"], capture_output=True, text=True)
    assert bad.returncode == 2 and bad.stderr.startswith("error:")


def test_json_floats_are_plain_numbers():
    blob = json.loads(run("planar-demo", "--s", "1", "--t", "0", "--seed", "1").text)
    assert isinstance(blob["geodesic_max_residual"], float)
    assert np.isfinite(blob["geodesic_max_residual"])
