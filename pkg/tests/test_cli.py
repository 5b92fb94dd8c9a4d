"""Command line front end."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from conftest import FIXTURES
from txguard.cli import main

FIG5 = str(FIXTURES / "fig5.w4.sol-core")
DIVMOD = str(FIXTURES / "divmod.w4.sol-core")
DRUG = str(FIXTURES / "drugdealer.w4.sol-core")


def test_verify_text(capsys):
    assert main(["verify", FIG5, "--width", "4"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "5:9 add-overflow proven"
    assert out[-1].startswith("# invariant: ")


def test_verify_json_and_exit_code(capsys):
    assert main(["verify", DIVMOD, "--width", "4", "--timeout", "2", "--report", "json"]) == 1
    d = json.loads(capsys.readouterr().out)
    assert d["summary"]["alarms"] == 2 and d["success"] is False


def test_verify_access_check(capsys):
    assert main(["verify", DRUG, "--width", "4", "--check", "access"]) == 1
    out = capsys.readouterr().out
    assert "12:5 access-control alarm" in out and "overflow" not in out


def test_dump_paths(capsys):
    assert main(["verify", FIG5, "--width", "4", "--dump-paths"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("p1: ((entry_0, true), n:=1")


def test_oracle_command(capsys):
    assert main(["oracle", DIVMOD, "--width", "4", "--max-tx", "1"]) == 1
    out = capsys.readouterr().out.splitlines()
    assert "7:9 div-by-zero violable" in out
    assert any(line.endswith("safe-within-bound") for line in out)
    assert out[-1].startswith("# 2 violable of 4;")


def test_parse_error_is_located(tmp_path, capsys):
    bad = tmp_path / "bad.sol-core"
    bad.write_text("contract T {\n  uint x\n}\n")
    assert main(["verify", str(bad)]) == 2
    err = capsys.readouterr().err
    assert err.startswith(f"{bad}:") and ": error: " in err


def test_missing_file_and_missing_solver(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope.sol-core")]) == 2
    assert main(["verify", DIVMOD, "--width", "4", "--solver-cmd", "no-such-solver-xyz"]) == 2
    assert "solver command not found" in capsys.readouterr().err


def test_oracle_rejects_wide_contracts(capsys):
    assert main(["oracle", FIG5, "--width", "16"]) == 2
    assert "width" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["verify", FIG5, "--check", "bogus"], ["verify", FIG5, "--width", "0"], []])
def test_bad_arguments_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "txguard.cli", "verify", FIG5, "--width", "4"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0 and "proven" in r.stdout


@pytest.mark.skipif(shutil.which("txguard") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["txguard", "verify", FIG5, "--width", "4"], capture_output=True, text=True)
    assert r.returncode == 0
