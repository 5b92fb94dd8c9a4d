from txguard.lang import Assert, Assign, Call, Havoc, iter_stmts, parse, queries
from txguard.lang.inline import has_calls, havoc_summary, inline_calls, may_write
from txguard.lang.instrument import instrument
from txguard.logic import TRUE, conj, le
from conftest import corpus, k, u

SRC = """contract T { uint y; uint z; address owner;
 function g(uint a) internal returns (uint) { z = z + a; return a * 2; }
 function h(uint a) internal { y = y - a; }
 function f(uint a) public { y = g(a); h(a); } }"""


def _stmts(f):
    return list(iter_stmts(f.body))


def test_may_write_is_transitive():
    c = parse(SRC, width=8)
    mw = may_write(c)
    assert mw["g"] == {"z"} and mw["h"] == {"y"}
    assert {"y", "z"} <= mw["f"]


def test_inlining_renames_and_binds():
    c = inline_calls(instrument(parse(SRC, width=8)), 2)
    assert not has_calls(c)
    assert [f.name for f in c.all_functions] == ["constructor", "f"]
    f = c.function("f")
    names = {s.target.name for s in _stmts(f) if isinstance(s, Assign)}
    assert {"a@1", "g.ret@1", "a@2", "y", "z"} <= names
    # the callee's queries travel with its body
    assert {s.meta.kind for s in _stmts(f) if isinstance(s, Assert)} == {
        "add-overflow", "mul-overflow", "sub-underflow",
    }


def test_depth_zero_havocs_modified_globals_and_receiver():
    c = inline_calls(parse(SRC, width=8), 0)
    havocs = [s for s in _stmts(c.function("f")) if isinstance(s, Havoc)]
    assert [set(h.names) for h in havocs] == [{"y", "z"}, {"y"}]
    # callees that were not inlined stay in the contract
    assert {f.name for f in c.functions} == {"f", "g", "h"}


def test_large_callees_are_havocked():
    body = " ".join("y = y + 1;" for _ in range(25))
    c = parse(f"""contract T {{ uint y;
        function g() internal {{ {body} }}
        function f() public {{ g(); }} }}""", width=8)
    flat = inline_calls(c, 2)
    assert any(isinstance(s, Havoc) for s in _stmts(flat.function("f")))


def test_external_calls_havoc_only_the_receiver():
    c = parse("""contract T { uint y; address tok;
        function f() public { y = tok.balanceOf(tok); } }""", width=8)
    flat = inline_calls(c, 2)
    (h,) = [s for s in _stmts(flat.function("f")) if isinstance(s, Havoc)]
    assert h.names == ("y",)


def test_havoc_summary_drops_facts_about_current_versions():
    y, z = u("y", 8), u("z", 8)
    pre = conj(le(y, k(3, 8)), le(z, k(4, 8)), le(y.primed(1), k(5, 8)))
    after = havoc_summary(pre, {"y"})
    assert after == conj(le(z, k(4, 8)), le(y.primed(1), k(5, 8)))
    assert havoc_summary(le(y, k(1, 8)), {"y"}) == TRUE


def test_queries_survive_inlining_with_same_metadata():
    c = instrument(parse(SRC, width=8))
    flat = inline_calls(c, 2)
    assert set(queries(flat)) == set(queries(c))


def test_call_free_contracts_are_unchanged():
    c = corpus("fig4_btx")
    assert inline_calls(c, 2) == c
    assert not any(isinstance(s, Call) for f in c.all_functions for s in iter_stmts(f.body))
