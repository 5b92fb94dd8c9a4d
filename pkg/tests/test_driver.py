"""The feedback loop, reports and their emission."""

from __future__ import annotations

import json
import time

import pytest

from conftest import FIXTURES, corpus, fixture
from txguard.driver import (
    EXIT_ALARMS,
    EXIT_OK,
    RunConfig,
    emit_report,
    paths_text,
    report_dict,
    verify,
    verify_contract,
    verify_source,
)

NO_ARITH = """contract Plain {
  uint x;
  address owner;
  function set(address a) public { x = 3; }
}"""


def test_fig5_report_and_invariant():
    r = verify_contract(corpus("fig5_running_example"))
    assert [q.verdict for q in r.records] == ["proven"]
    assert r.success and r.exit_code == EXIT_OK
    assert r.invariant is not None and "n ≤ 100" in str(r.invariant)
    assert r.paths == 3 and r.candidates_tried >= 2


def test_contract_without_queries_succeeds_fast():
    t0 = time.monotonic()
    r = verify_source(NO_ARITH, RunConfig(width=256))
    assert time.monotonic() - t0 < 1
    assert r.records == [] and r.success and r.exit_code == EXIT_OK
    assert str(r.invariant) == "ψ = true"


def test_alarm_report_exit_code_and_lines():
    r = verify_contract(fixture(FIXTURES / "divmod.w4.sol-core"), RunConfig(width=4, global_budget=3))
    assert r.exit_code == EXIT_ALARMS and not r.success
    assert r.alarm_lines("div-by-zero") == {7, 8}
    assert r.proven_lines("div-by-zero") == {13, 14}
    assert r.invariant is None


def test_budget_is_respected():
    t0 = time.monotonic()
    r = verify_contract(fixture(FIXTURES / "divmod.w4.sol-core"), RunConfig(width=4, global_budget=1))
    assert r.timed_out
    assert time.monotonic() - t0 < 1 + 5


def test_access_checker_is_opt_in():
    c = corpus("drugdealer")
    assert not verify_contract(c).alarm_lines("access-control")
    r = verify_contract(c, RunConfig(checkers=("access",)))
    assert r.alarm_lines("access-control") == {12}


def test_text_report_format():
    r = verify_contract(corpus("fig5_running_example"))
    out = emit_report(r, "text").splitlines()
    assert out[0] == "5:9 add-overflow proven"
    assert out[1].startswith("# RunningExample: 1 queries, 1 proven, 0 alarms (")
    assert out[2].startswith("# invariant: ψ = ")


def test_json_report_schema():
    r = verify_contract(corpus("fig5_running_example"))
    d = json.loads(emit_report(r, "json"))
    assert d["schema"] == "txguard-report/1"
    assert d["contract"] == "RunningExample" and d["success"] is True
    assert d["queries"] == [{"id": 0, "kind": "add-overflow", "line": 5, "col": 9, "verdict": "proven"}]
    assert d["summary"] == {"total": 1, "proven": 1, "alarms": 0}
    assert set(d["invariant"]) == {"transaction", "loops"}
    assert {"elapsed_seconds", "paths", "candidates_tried", "timed_out", "solver"} <= set(d["stats"])
    assert report_dict(r)["stats"]["solver"]["queries"] >= 1


def test_unknown_report_format():
    r = verify_source(NO_ARITH)
    with pytest.raises(ValueError):
        emit_report(r, "xml")


def test_reports_are_deterministic():
    c = fixture(FIXTURES / "fig1.w4.sol-core")
    a = verify_contract(c, RunConfig(width=4))
    b = verify_contract(c, RunConfig(width=4))
    assert [(q.meta, q.verdict) for q in a.records] == [(q.meta, q.verdict) for q in b.records]
    assert a.candidates_tried == b.candidates_tried


def test_verify_reads_input_path():
    r = verify(RunConfig(input_path=str(FIXTURES / "fig5.w4.sol-core"), width=4))
    assert r.success
    with pytest.raises(ValueError):
        verify(RunConfig())


@pytest.mark.parametrize(
    "kw",
    [
        {"global_budget": 0},
        {"solver_timeout": -1},
        {"checkers": ()},
        {"checkers": ("reentrancy",)},
        {"report_format": "xml"},
        {"width": 1},
        {"inline_depth": -1},
    ],
)
def test_run_config_validation(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


def test_paths_text_lists_every_path():
    text = paths_text(corpus("fig5_running_example"))
    assert text.count("\n") == 2 and text.startswith("p1: ")
