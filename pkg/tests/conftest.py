"""Shared helpers for the test suite."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

import pytest

from txguard.lang import parse
from txguard.logic import ArraySort, BitVec, Const, Var
from txguard.solver import Solver

FIXTURES = Path(__file__).parent / "fixtures"


def corpus_text(name: str) -> str:
    return resources.files("txguard").joinpath("corpus", f"{name}.sol-core").read_text()


def corpus(name: str, width: int = 256):
    return parse(corpus_text(name), width=width)


def fixture_files() -> list[Path]:
    return sorted(FIXTURES.glob("*.sol-core"))


def fixture_width(path: Path) -> int:
    return int(re.search(r"\.w(\d+)\.sol-core$", path.name).group(1))


def fixture(path: Path):
    return parse(path.read_text(), width=fixture_width(path))


def u(name: str, w: int = 256, version: int = 0) -> Var:
    return Var(name, BitVec(w), version)


def addr(name: str, aw: int = 160, version: int = 0) -> Var:
    return Var(name, BitVec(aw), version)


def mapping(name: str, w: int = 256, aw: int = 160, version: int = 0) -> Var:
    return Var(name, ArraySort(BitVec(aw), BitVec(w)), version)


def k(value: int, w: int = 256) -> Const:
    return Const(value, w)


@pytest.fixture
def solver() -> Solver:
    return Solver()


# Acceptance criteria record one verdict each; printed after the run.
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {detail}")
