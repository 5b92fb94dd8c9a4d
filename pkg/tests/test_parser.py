import pytest

from txguard.lang import (
    ArrAssign,
    Assign,
    Assume,
    Call,
    ContractSyntaxError,
    ContractTypeError,
    If,
    ScopeError,
    Seq,
    While,
    iter_stmts,
    parse,
)
from txguard.logic import FALSE, ArraySort, Atom, BitVec, Sum
from conftest import corpus

CORPUS = [
    "fig1_transfer_proxy",
    "fig2_multiple_transfer",
    "fig4_btx",
    "fig5_running_example",
    "fig6_unlock_reward",
    "drugdealer",
    "drugdealer_guarded",
]


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_parses(name):
    c = corpus(name)
    assert c.functions


def test_running_example_shape():
    c = corpus("fig5_running_example")
    assert c.name == "RunningExample"
    assert [g.name for g in c.globals] == ["n"]
    # n is assigned before it is read, so no zero-initialisation is added
    assert isinstance(c.constructor.body, Assign)
    f = c.function("f")
    assert isinstance(f.body, Seq)
    assign, branch = f.body.stmts
    assert assign.loc[0] == 5
    assert isinstance(branch, If)


def test_constructor_prologue_zero_inits_and_sums():
    c = parse("""contract T { uint x; mapping(address=>uint) m;
        constructor() { x = x + 1; } function f() public {} }""", width=8)
    stmts = c.constructor.body.stmts
    assert isinstance(stmts[0], Assign) and stmts[0].value.value == 0
    assert isinstance(stmts[1], Assume) and isinstance(stmts[1].cond.left, Sum)


def test_btx_constructor_keeps_source_assignments():
    stmts = corpus("fig4_btx").constructor.body.stmts
    assert isinstance(stmts[0], Assume)
    assert isinstance(stmts[1], Assign) and stmts[1].target.name == "totalSupply"
    assert isinstance(stmts[2], ArrAssign) and stmts[2].indices[0].name == "msg.sender"


def test_sorts_follow_declared_types():
    c = corpus("fig6_unlock_reward", width=8)
    locked = c.global_vars[1]
    assert locked.sort == ArraySort(BitVec(160), ArraySort(BitVec(160), BitVec(8)))
    c = parse("contract T { address a; bool b; function f() public { b = true; } }", width=16)
    a, b = c.global_vars
    assert a.sort == BitVec(160) and b.sort == BitVec(1)


def test_for_loop_becomes_init_and_labelled_while():
    c = parse("""contract T { uint x;
        function f(uint a) public { for (uint i = 0; i < a; i++) { x += i; } } }""", width=8)
    init, loop = c.function("f").body.stmts
    assert isinstance(init, Assign) and init.target.name == "i"
    assert isinstance(loop, While) and loop.label == "f#1"
    body = loop.body.stmts
    assert body[-1].target.name == "i"


def test_repeated_loop_variables_are_block_scoped():
    c = parse("""contract T { uint x; function f() public {
        for (uint i = 0; i < 2; i++) { x += 1; }
        for (uint i = 0; i < 3; i++) { x += 2; } } }""", width=8)
    labels = [s.label for s in iter_stmts(c.function("f").body) if isinstance(s, While)]
    assert labels == ["f#1", "f#2"]


def test_revert_and_require():
    c = parse("""contract T { uint x; function f(uint a) public {
        require(a > 1); if (a > 5) revert(); x = a; } }""", width=8)
    stmts = c.function("f").body.stmts
    assert isinstance(stmts[0], Assume)
    assert stmts[1].then == Assume(FALSE)


def test_calls_and_returns():
    c = parse("""contract T { uint y;
        function g(uint a) internal returns (uint) { return a + 1; }
        function f(uint a) public { y = g(a); } }""", width=8)
    g = c.function("g")
    assert g.visibility == "internal" and g.returns.name == "g.ret"
    call = c.function("f").body
    assert isinstance(call, Call) and call.receiver.name == "y"


def test_external_object_call():
    c = corpus("drugdealer")
    call = [s for s in iter_stmts(c.function("buyDrugs").body) if isinstance(s, Call)][0]
    assert call.obj == "ceoAddr" and call.name == "transfer"


def test_array_length_and_bool_conditions():
    c = corpus("fig2_multiple_transfer")
    f = c.function("multipleTransfer")
    names = {v.name for s in iter_stmts(f.body) if isinstance(s, Assume) for v in _vars(s.cond)}
    assert "to.length" in names


def _vars(f):
    from txguard.logic import free_vars

    return free_vars(f)


def test_hex_literals_and_compound_ops():
    c = parse("contract T { uint x; function f() public { x -= 0x10; x *= 2; } }", width=8)
    a, b = c.function("f").body.stmts
    assert a.value.op == "-" and a.value.right.value == 16
    assert b.value.op == "*"


@pytest.mark.parametrize(
    "src, exc, line",
    [
        ("contract T { uint x; function f() public { x = ; } }", ContractSyntaxError, 1),
        ("contract T { uint x;\n function f() public { y = 1; } }", ScopeError, 2),
        ("contract T { uint x; function f() public { uint x = 1; } }", ScopeError, 1),
        ("contract T { uint x; address a;\n\n function f() public { x = a; } }", ContractTypeError, 3),
        ("contract T { uint x; function f() public { return; x = 1; } }", ContractSyntaxError, 1),
    ],
)
def test_diagnostics_carry_positions(src, exc, line):
    with pytest.raises(exc) as info:
        parse(src, width=8)
    assert info.value.line == line


def test_constants_must_fit_the_width():
    with pytest.raises(Exception):
        parse("contract T { uint x; function f() public { x = 300; } }", width=8)


def test_conditions_are_atoms():
    c = corpus("fig5_running_example")
    cond = c.function("f").body.stmts[1].cond
    assert isinstance(cond, Atom) and cond.rel == ">="
