from txguard.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    BinOp,
    Implies,
    Not,
    Select,
    Store,
    Sum,
    add,
    conj,
    conjuncts,
    constants,
    disj,
    free_vars,
    ge,
    le,
    lt,
    mentions_current,
    neg,
    pretty,
    rename,
    sort_of,
    subst,
)
from conftest import addr, k, mapping, u

n = u("n")
m = u("m")


def test_conj_flattens_dedups_and_sorts():
    a, b = le(n, k(100)), ge(m, k(1))
    assert conj(a, conj(b, a)) == conj(b, a)
    assert conj() == TRUE
    assert conj(a, TRUE) == a
    assert conj(a, FALSE) == FALSE
    assert isinstance(conj(a, b), And)
    assert set(conjuncts(conj(a, b))) == {a, b}


def test_disj_units():
    a = le(n, k(100))
    assert disj() == FALSE
    assert disj(a, TRUE) == TRUE
    assert disj(a, FALSE) == a


def test_neg_pushes_through_connectives():
    f = conj(le(n, k(1)), ge(m, k(2)))
    g = neg(f)
    assert not isinstance(g, Not)
    assert neg(neg(le(n, k(1)))) == le(n, k(1))
    assert neg(TRUE) == FALSE


def test_pretty_uses_paper_notation():
    f = Implies(conj(le(n.primed(1), k(100)), Atom("=", n, add(n.primed(1), k(1)))), le(n, k(100)))
    text = pretty(f)
    assert "n'" in text and "≤" in text and "→" in text
    b = mapping("balance")
    assert pretty(Atom("=", Sum(b), k(10000))) == "sum(balance) = 10000"
    s = Store(b.primed(1), addr("to"), k(3))
    assert pretty(s) == "balance'⟨to ◁ 3⟩"


def test_rename_and_subst():
    f = le(add(n, k(1)), m)
    g = rename(f, {n: n.primed(1)})
    assert n.primed(1) in free_vars(g) and n not in free_vars(g)
    h = subst(f, m, k(5))
    assert free_vars(h) == {n}


def test_constants_and_sorts():
    b = mapping("b")
    t = Select(b, addr("x"))
    assert sort_of(t) == sort_of(n)
    assert constants(lt(add(n, k(7)), k(9))) == {k(7), k(9)}


def test_mentions_current_ignores_primed_versions():
    f = le(n.primed(1), k(3))
    assert not mentions_current(f, ["n"])
    assert mentions_current(le(n, k(3)), ["n"])


def test_binop_loc_does_not_affect_equality():
    assert BinOp("+", n, k(1), (3, 4)) == BinOp("+", n, k(1), (9, 9))
