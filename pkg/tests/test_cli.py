"""CLI contract: exit codes, formats, stream separation, determinism."""

import json
import subprocess
import sys

import pytest

from doublepower import PhaseTable


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "doublepower", *argv],
        capture_output=True,
        text=True,
        timeout=300,
    )


def test_thresholds_human():
    res = run_cli("thresholds", "--p", "2", "--q", "3")
    assert res.returncode == 0
    assert "omega_crit = 0.22222222222222221" in res.stdout
    assert "eta_crit = 0.25" in res.stdout
    assert res.stderr == ""


def test_thresholds_json():
    res = run_cli("thresholds", "--p", "2", "--q", "3", "--output", "json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert set(payload) == {"omega_crit", "eta_crit", "u_star_F", "u_star_f"}
    assert payload["eta_crit"] == 0.25
    assert payload["u_star_f"] == 0.5


def test_thresholds_rejects_bad_exponents():
    res = run_cli("thresholds", "--p", "3", "--q", "2")
    assert res.returncode == 2
    assert res.stdout == ""
    assert "q > p" in res.stderr


def test_check_holds():
    res = run_cli(
        "check", "--omega", "0.1", "--p", "2", "--q", "3",
        "--condition", "existence", "--output", "json",
    )
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert set(payload) == {"condition", "holds", "method", "margin", "witness"}
    assert payload["condition"] == "ExistenceF"
    assert payload["holds"] is True
    assert payload["margin"] < 0.0


def test_check_fails():
    res = run_cli(
        "check", "--omega", "0.3", "--p", "2", "--q", "3",
        "--condition", "uniqueness", "--output", "csv",
    )
    assert res.returncode == 3
    lines = res.stdout.splitlines()
    assert lines[0] == "condition,holds,method,margin,witness"
    assert lines[1].startswith("UniquenessFtildeSmall,false,")


def test_check_indeterminate_at_threshold():
    res = run_cli(
        "check", "--omega", "0.2222222222222222", "--p", "2", "--q", "3",
        "--condition", "existence",
    )
    assert res.returncode == 4
    assert res.stdout == ""
    assert "indeterminate" in res.stderr


def test_check_rejects_unknown_condition():
    res = run_cli(
        "check", "--omega", "0.1", "--p", "2", "--q", "3",
        "--condition", "bogus",
    )
    assert res.returncode == 2


def test_verify_deterministic():
    argv = ("verify", "--samples", "40", "--seed", "11", "--output", "json")
    first = run_cli(*argv)
    second = run_cli(*argv)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    payload = json.loads(first.stdout)
    assert payload["samples"] == 40
    assert payload["failed"] == 0
    assert payload["passed"] + payload["skipped_in_band"] == 40


def test_verify_single_instance():
    res = run_cli(
        "verify", "--samples", "1", "--p-range", "2:2", "--q-range", "3:3",
    )
    assert res.returncode == 0
    assert "failed = 0" in res.stdout


@pytest.mark.parametrize("bad", ["3:2", "abc", "1.5"])
def test_verify_malformed_range(bad):
    res = run_cli("verify", "--samples", "1", "--p-range", bad)
    assert res.returncode == 2
    assert "range" in res.stderr


def test_solve_writes_profile(tmp_path):
    out = tmp_path / "profile.csv"
    res = run_cli(
        "solve", "--omega", "0.1", "--p", "2", "--q", "3", "--n", "3",
        "--out", str(out), "--output", "json",
    )
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert 0.172 < payload["alpha"] < 0.888
    lo, hi = payload["bracket"]
    assert lo <= payload["alpha"] <= hi
    assert payload["ode_residual"] < 1e-6
    assert payload["profile"]["orbit_class"] == "Decay"

    lines = out.read_text().splitlines()
    assert lines[0] == "r,u,u_r"
    assert len(lines) == len(payload["profile"]["samples"]) + 1


def test_solve_no_existence():
    res = run_cli("solve", "--omega", "0.24", "--p", "2", "--q", "3", "--n", "3")
    assert res.returncode == 3
    assert res.stdout == ""
    assert "omega_crit=0.22222222222222221" in res.stderr


def test_solve_n1():
    res = run_cli("solve", "--omega", "0.1", "--p", "2", "--q", "3", "--n", "1")
    assert res.returncode == 0
    assert "alpha_star = 0.17225343419361253" in res.stdout


def test_sweep_grid():
    argv = (
        "sweep", "--p", "1.5:4", "--q", "2:6", "--omega", "0.01:0.5",
        "--res", "10",
    )
    first = run_cli(*argv)
    assert first.returncode == 0
    lines = first.stdout.splitlines()
    assert lines[0] == "p,q,omega,omega_crit,eta_crit,existence,uniqueness,consistent"
    assert len(lines) - 1 <= 1000
    # reparse and re-serialize: identical bytes
    assert PhaseTable.from_csv(first.stdout).to_csv() == first.stdout
    assert first.stdout == run_cli(*argv).stdout


def test_sweep_single_point_matches_check():
    res = run_cli(
        "sweep", "--p", "2:2", "--q", "3:3", "--omega", "0.1:0.1", "--res", "1",
    )
    assert res.returncode == 0
    lines = res.stdout.splitlines()
    assert len(lines) == 2
    assert lines[1].endswith("true,true,true")


def test_sweep_json_rows():
    res = run_cli(
        "sweep", "--p", "2:2.5", "--q", "3:3.5", "--omega", "0.1:0.2",
        "--res", "2", "--output", "json",
    )
    assert res.returncode == 0
    rows = json.loads(res.stdout)["rows"]
    assert len(rows) == 8
    assert {row["omega"] for row in rows} == {0.1, 0.2}
    assert rows[0]["existence"] is True


def test_sweep_unwritable_path():
    res = run_cli(
        "sweep", "--p", "2:2", "--q", "3:3", "--omega", "0.1:0.1",
        "--res", "1", "--out", "/nonexistent-dir/table.csv",
    )
    assert res.returncode == 7
    assert "io failure" in res.stderr


def test_unknown_command():
    res = run_cli("frobnicate")
    assert res.returncode == 2
