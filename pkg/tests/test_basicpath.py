import pytest

from txguard.basicpath import (
    BasicPath,
    FuncEntry,
    FuncExit,
    Loop,
    build_paths,
    dump_paths,
    skeleton,
)
from txguard.lang import Assert, Assign, Assume, parse
from txguard.lang.instrument import instrument
from txguard.logic import TRUE, Atom, add, ge, le, lt
from conftest import corpus, k, u

n = u("n")
PSI = le(n, k(100))


def shape(p: BasicPath):
    """Structure of a path, ignoring query ids and source positions."""
    stmts = []
    for a in p.stmts:
        if isinstance(a, Assert):
            stmts.append(("assert", a.cond))
        elif isinstance(a, Assume):
            stmts.append(("assume", a.cond))
        else:
            stmts.append(("assign", a.target, a.value))
    return (p.start_label, p.pre, tuple(stmts), p.end_label, p.post)


def test_example_2_paths():
    c = instrument(corpus("fig5_running_example"))
    paths = build_paths(c, PSI, {})
    one = Assign(n, k(1))
    inc = [("assert", ge(add(n, k(1)), n)), ("assign", n, add(n, k(1)))]
    expected = [
        (FuncEntry("constructor"), TRUE, (("assign", n, k(1)),), FuncExit("constructor"), PSI),
        (FuncEntry("f"), PSI, (*inc, ("assume", ge(n, k(100))), ("assign", one.target, one.value)), FuncExit("f"), PSI),
        (FuncEntry("f"), PSI, (*inc, ("assume", lt(n, k(100)))), FuncExit("f"), PSI),
    ]
    assert [shape(p) for p in paths] == expected


def test_example_2_dump_matches_paper_notation():
    c = instrument(corpus("fig5_running_example"))
    text = dump_paths(build_paths(c, PSI, {}))
    assert text.splitlines()[0] == "p1: ((entry_0, true), n:=1, (exit_0, n ≤ 100))"
    assert "assert(n+1 ≥ n); n:=n+1; assume(n < 100)" in text.splitlines()[2]


def test_loops_cut_paths_at_the_head():
    c = parse("""contract T { uint x;
        function f(uint a) public { x = 0; while (x < a) { x = x + 1; } x = 5; } }""", width=8)
    paths = build_paths(c, TRUE, {"f#1": le(u("x", 8), u("a", 8))})
    ends = [(p.start_label, p.end_label) for p in paths if p.function == "f"]
    head = Loop("f#1")
    assert ends == [(FuncEntry("f"), head), (head, head), (head, FuncExit("f"))]
    into, body, out = [p for p in paths if p.function == "f"]
    assert into.post == le(u("x", 8), u("a", 8))
    assert body.pre == body.post == into.post
    assert out.stmts[0] == Assume(Atom(">=", u("x", 8), u("a", 8)))


def test_internal_functions_use_true_annotations():
    c = parse("""contract T { uint x;
        function g() internal { x = 1; }
        function f() public { x = 2; } }""", width=8)
    paths = build_paths(c, le(u("x", 8), k(3, 8)), {})
    g = [p for p in paths if p.function == "g"]
    assert g and all(p.pre == TRUE and p.post == TRUE for p in g)


def test_ordering_is_constructor_then_functions_by_name():
    c = parse("""contract T { uint x;
        function zeta() public { x = 1; }
        function alpha() public { x = 2; } }""", width=8)
    assert [s.function for s in skeleton(c)] == ["constructor", "alpha", "zeta"]


def test_path_count_is_product_of_branches():
    c = parse("""contract T { uint x;
        function f(uint a) public { if (a > 1) { x = 1; } if (a > 2) { x = 2; } else { x = 3; } } }""", width=8)
    assert len([p for p in build_paths(c, TRUE, {}) if p.function == "f"]) == 4


def test_calls_must_be_inlined_first():
    c = parse("""contract T { uint x; function g() internal { x = 1; }
        function f() public { g(); } }""", width=8)
    with pytest.raises(ValueError):
        skeleton(c)
