import csv
import json

import pytest

from bellasym.cli import run_cli
from bellasym.game_model import builtin_game, serialize_game


@pytest.fixture
def chsh_file(tmp_path):
    p = tmp_path / "chsh.game"
    p.write_text(serialize_game(builtin_game("chsh")))
    return str(p)


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound(capsys, chsh_file):
    code, out, _ = run(capsys, "bound", chsh_file)
    doc = json.loads(out)
    assert code == 0 and doc["classical_bound"] == 0.5
    assert doc["strategy"] == {"alice": [0, 0], "bob": [0, 0]}


def test_builtin_name_as_game(capsys):
    code, out, _ = run(capsys, "bound", "i3322")
    assert code == 0 and json.loads(out)["classical_bound"] == 0.375


def test_builtin_prints_file(capsys):
    code, out, _ = run(capsys, "builtin", "chsh")
    assert code == 0 and out == serialize_game(builtin_game("chsh"))
    code, _, err = run(capsys, "builtin", "nope")
    assert code == 1 and "available" in err


def test_adv_bound_range_error(capsys, chsh_file):
    code, _, err = run(capsys, "adv-bound", chsh_file, "--xi-x", "2.0", "--xi-y", "0")
    assert code == 1 and "outside [0, 1]" in err


def test_adv_bound_with_oracle(capsys):
    code, out, _ = run(capsys, "adv-bound", "chsh", "--xi-x", "1", "--xi-y", "0", "--oracle", "--restarts", "2")
    doc = json.loads(out)
    assert code == 0 and doc["value"] == 1.0 and doc["oracle_value"] <= 1.0 + 1e-6
    assert doc["witness"].startswith("alphabet")


def test_sweep_to_file(capsys, tmp_path):
    out = tmp_path / "curve.csv"
    code, stdout, _ = run(capsys, "sweep", "chsh", "--steps", "21", "--heights", "4", "--out", str(out))
    assert code == 0 and stdout == ""
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 21
    assert all(float(r["delta"]) == 0.0 for r in rows)


def test_sweep_bit_stable(capsys):
    _, a, _ = run(capsys, "sweep", "i3322", "--steps", "3")
    _, b, _ = run(capsys, "sweep", "i3322", "--steps", "3")
    assert a == b and a.splitlines()[-1] == "1,1,0.6875,0.5625,0.125,0.3125,0.1875"


def test_check_symmetry(capsys):
    code, out, _ = run(capsys, "check-symmetry", "i3322")
    doc = json.loads(out)
    assert code == 0 and doc["transpose_invariant"] is False and len(doc["first_differing_entry"]) == 4


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "chsh", "--xi-x", "0.5", "--xi-y", "0", "--shots", "20000", "--seed", "5")
    doc = json.loads(out)
    assert code == 0 and doc["analytic_value"] == 0.75 and abs(doc["z_score"]) < 5


@pytest.mark.parametrize("argv", [["frobnicate"], ["bound"], ["bound", "chsh", "--bogus"], []])
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "usage" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "bound", "/nonexistent/x.game")
    assert code == 1 and "no game file" in err


def test_malformed_file(capsys, tmp_path):
    p = tmp_path / "bad.game"
    p.write_text("settings A=2 B=2\noutcomes A=2 B=2\ncoeff 9 0 0 0 1\n")
    code, _, err = run(capsys, "bound", str(p))
    assert code == 1 and "line 3" in err


def test_solver_error_exit_2(capsys, monkeypatch):
    from bellasym import cli
    from bellasym.errors import SolverError

    def boom(*a, **k):
        raise SolverError("pivot cap 0 exceeded", {"pivots": 1})

    monkeypatch.setattr(cli, "solve_adversarial_bound", boom)
    code, _, err = run(capsys, "adv-bound", "chsh", "--xi-x", "0.5", "--xi-y", "0")
    assert code == 2 and "pivot cap" in err


def test_help_exits_zero(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "adv-bound" in out
