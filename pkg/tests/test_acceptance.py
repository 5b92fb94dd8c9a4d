"""Acceptance criteria 1-10, one verdict line per criterion.

Each test records PASS or FAIL with a short detail; the lines are printed in
the "acceptance criteria" section of the pytest summary.
"""

from __future__ import annotations

import functools
import time

import pytest

import test_basicpath
import test_properties
import test_vcgen
from conftest import ACCEPTANCE, FIXTURES, addr, corpus, fixture, fixture_files, k, mapping, u
from txguard.driver import RunConfig, verify_contract
from txguard.logic import TRUE, Atom, BinOp, Implies, Select, Sum, conj, conjuncts, div, disj, eq, ge, mul, ne, sub
from txguard.oracle import oracle_search
from txguard.solver import Solver, quick_invalid


def criterion(n: int):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            try:
                detail = fn(*a, **kw) or ""
            except AssertionError as exc:
                ACCEPTANCE[n] = ("FAIL", str(exc).splitlines()[0] if str(exc) else "assertion failed")
                print(f"criterion {n}: FAIL")
                raise
            ACCEPTANCE[n] = ("PASS", detail)
            print(f"criterion {n}: PASS {detail}")

        return run

    return wrap


def entails(psi, goal) -> bool:
    if goal in conjuncts(psi):
        return True
    return Solver().check_validity(Implies(psi, goal)).is_valid


def timed(c, **kw):
    t0 = time.monotonic()
    r = verify_contract(c, RunConfig(width=c.width, **kw))
    return r, time.monotonic() - t0


@criterion(1)
def test_criterion_1_running_example():
    r, dt = timed(corpus("fig5_running_example"))
    assert (len(r.proven), len(r.alarms)) == (1, 0), f"{len(r.proven)} proven / {len(r.alarms)} alarms"
    assert dt < 10, f"took {dt:.1f}s"
    assert entails(r.invariant.psi, Atom("<=", u("n"), k(100))), f"ψ = {r.invariant} does not entail n ≤ 100"
    return f"1 proven / 0 alarms in {dt:.2f}s; {r.invariant}"


@criterion(2)
def test_criterion_2_btx():
    r, dt = timed(corpus("fig4_btx"))
    assert (len(r.proven), len(r.alarms)) == (4, 0), f"{len(r.proven)} proven / {len(r.alarms)} alarms"
    assert dt < 60, f"took {dt:.1f}s"
    goal = eq(Sum(mapping("balance")), k(10000))
    assert entails(r.invariant.psi, goal), f"ψ = {r.invariant} does not entail sum(balance) = 10000"
    return f"4 proven / 0 alarms in {dt:.2f}s; ψ entails sum(balance) = 10000"


@criterion(3)
def test_criterion_3_transfer_proxy():
    r, _ = timed(corpus("fig1_transfer_proxy"))
    adds = {q.meta.line: q.verdict for q in r.records if q.kind == "add-overflow"}
    assert adds.get(2) == "alarm", "no alarm on line 2"
    # No missed-query regressions: every violation found at width 4 is alarmed.
    small = fixture(FIXTURES / "fig1.w4.sol-core")
    violable = {(m.line, m.kind) for m in oracle_search(small, max_tx=2).violated}
    alarmed = {(q.meta.line, q.kind) for q in verify_contract(small, RunConfig(width=4)).alarms}
    assert violable <= alarmed, f"missed {sorted(violable - alarmed)}"
    assert adds.get(8) == "proven", "line 8 not proven"
    # Line 9 is a genuine overflow when to == msg.sender (the width-4 oracle
    # finds it); a sound verifier must alarm, so this check cannot pass.
    assert adds.get(9) == "proven", (
        "line 9 alarm: genuine overflow when to == msg.sender "
        f"(oracle-violable at width 4: {(9, 'add-overflow') in violable}); line 2 alarm and line 8 proof hold"
    )
    return "line 2 alarm; lines 8 and 9 proven"


@criterion(4)
def test_criterion_4_multiple_transfer():
    r, _ = timed(corpus("fig2_multiple_transfer"), global_budget=20)
    muls = sorted(q.meta.line for q in r.alarms if q.kind == "mul-overflow")
    assert muls == [2, 3, 4], f"mul-overflow alarms at {muls}"
    return "3 mul-overflow alarms at lines 2, 3, 4"


@criterion(5)
def test_criterion_5_unlock_reward():
    r, _ = timed(corpus("fig6_unlock_reward"))
    sub5 = [q.verdict for q in r.records if q.meta.line == 5 and q.kind == "sub-underflow"]
    assert sub5 == ["alarm"], f"line 5 subtraction: {sub5}"
    return "line 5 subtraction alarmed (documented false positive reproduced)"


@criterion(6)
def test_criterion_6_invalidity_fast_path():
    a, b = u("a"), u("b")
    d = sub(a, b)
    vc = Implies(TRUE, disj(eq(d, k(0)), conj(ne(d, k(0)), eq(div(mul(d, k(255)), d), k(255)))))
    t0 = time.perf_counter()
    hit = quick_invalid(vc)
    dt = time.perf_counter() - t0
    s = Solver()
    verdict = s.check_validity(vc)
    assert hit and verdict.kind == "invalid", verdict
    assert dt < 1e-3, f"{dt * 1e3:.3f} ms"
    assert s.stats.smt_calls == 0
    return f"invalid in {dt * 1e6:.0f} µs, 0 SMT calls"


@criterion(7)
def test_criterion_7_template_fast_path():
    y, a, bb, kk = u("y"), mapping("a"), u("b"), u("k")
    i, j = addr("i"), addr("j")
    side = eq(u("z"), k(1))
    cell = ge(BinOp("+", Select(a, j), kk), Select(a, j))
    formulas = [
        Implies(side, ge(y, div(mul(y, k(99)), k(100)))),
        Implies(conj(side, eq(Sum(a), k(100)), ge(Select(a, i), kk)), cell),
        Implies(conj(eq(Sum(a), bb), side, eq(bb, k(100)), ge(Select(a, i), kk)), cell),
        Implies(side, ge(BinOp("+", k(48), BinOp("%", y, k(10))), k(48))),
    ]
    s = Solver()
    verdicts = [s.check_validity(f) for f in formulas]
    assert all(v.is_valid for v in verdicts), verdicts
    assert s.stats.smt_calls == 0, f"{s.stats.smt_calls} SMT calls"
    return "4/4 valid via " + ", ".join(v.reason.split(":")[1] for v in verdicts)


@criterion(8)
def test_criterion_8_golden_paths_and_vcs():
    test_basicpath.test_example_2_paths()
    test_vcgen.test_example_3_vc_pair()
    test_vcgen.test_example_3_vcs_are_valid(Solver())
    return "Example 2 paths and Example 3 VC pair match; both VCs valid"


@criterion(9)
@pytest.mark.slow
def test_criterion_9_property_suites():
    t0 = time.monotonic()
    test_properties.test_sp_is_sound_for_concrete_executions()
    test_properties.test_eliminate_sum_is_equisatisfiable()
    test_properties.test_match_template_never_validates_an_invalid_formula()
    test_properties.test_quick_invalid_satisfies_the_invalidity_proposition()
    executions = 0
    for path in fixture_files():
        c = fixture(path)
        checks = ("arith", "access")
        o = oracle_search(c, max_tx=2, checks=checks)
        r = verify_contract(c, RunConfig(width=c.width, global_budget=10, checkers=checks))
        missed = o.violated & {q.meta for q in r.proven}
        assert not missed, f"{path.name}: violable but proven {sorted(missed)}"
        executions += o.executions
    assert executions >= 1000
    lead = f"sp, sum elimination, templates, Proposition 1 and differential ({executions} executions) pass"
    # The literal claim: no valid VC is ever flagged by the free-variable test.
    wrong = [
        vc
        for vc in test_properties.fast_path_corpus()
        if quick_invalid(vc) and test_properties.exhaustive_valid(vc)
    ]
    assert not wrong, f"{lead}; quick_invalid flags {len(wrong)} valid VCs (free-variable test alone is not sound for validity)"
    return f"{lead} in {time.monotonic() - t0:.0f}s"


@criterion(10)
def test_criterion_10_access_control():
    bad = verify_contract(corpus("drugdealer"), RunConfig(checkers=("access",)))
    good = verify_contract(corpus("drugdealer_guarded"), RunConfig(checkers=("access",)))
    assert bad.alarm_lines("access-control") == {12}, bad.alarm_lines("access-control")
    assert good.proven_lines("access-control") == {13} and not good.alarms, good.alarm_lines()
    return "DrugDealer alarm at line 12; guarded variant proven at line 13"
