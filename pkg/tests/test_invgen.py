"""Candidates, atom pool, refinement and the workset."""

from __future__ import annotations

import pytest

from conftest import addr, corpus, k, mapping, u
from txguard.basicpath import build_paths
from txguard.invgen import (
    CandidateInv,
    EmptyWorkset,
    RefineContext,
    Workset,
    atom_pool,
    choose,
    generate,
    refine,
    refineL,
    refineT,
    strengthen_workset,
)
from txguard.lang import parse
from txguard.lang.instrument import instrument
from txguard.logic import TRUE, Atom, Sum, conj, eq, ge, le


def test_candidate_size_counts_atoms():
    n = u("n")
    c = CandidateInv.make(conj(le(n, k(100)), ge(n, k(1))), {"f#1": eq(n, k(0))})
    assert c.size == 3
    assert CandidateInv.make(TRUE).size == 0


def test_candidate_drops_true_loop_entries():
    assert CandidateInv.make(TRUE, {"f#1": TRUE}) == CandidateInv.make(TRUE)


def test_conjoin_merges_psi_and_loops():
    n = u("n")
    a = CandidateInv.make(le(n, k(100)), {"l": ge(n, k(0))})
    b = CandidateInv.make(ge(n, k(1)), {"l": le(n, k(5)), "m": eq(n, k(2))})
    c = a.conjoin(b)
    assert c.psi == conj(le(n, k(100)), ge(n, k(1)))
    assert c.mu == {"l": conj(ge(n, k(0)), le(n, k(5))), "m": eq(n, k(2))}


def test_candidate_str():
    n = u("n")
    c = CandidateInv.make(le(n, k(100)), {"f#1": ge(n, k(0))})
    assert str(c) == "ψ = n ≤ 100; μ(f#1) = n ≥ 0"


def test_atom_pool_shapes():
    x, y, a = u("x", 8), u("y", 8), addr("o", 4)
    m = mapping("m", 8, 4)
    pool = atom_pool([x, y, a, m], [k(3, 8)], 8)
    assert eq(x, y) in pool
    assert Atom(">=", x, y) in pool and Atom(">=", y, x) in pool
    assert eq(x, k(3, 8)) in pool and Atom(">=", x, k(3, 8)) in pool and Atom("<=", x, k(3, 8)) in pool
    assert eq(Sum(m), k(3, 8)) in pool and eq(Sum(m), x) in pool
    # Address scalars only join equalities with each other; no ordering atoms.
    assert not any(isinstance(f, Atom) and a in (f.left, f.right) for f in pool)
    assert len(pool) == len(set(pool))


def test_atom_pool_ignores_versions_and_foreign_widths():
    x0, x1 = u("x", 8), u("x", 8, 1)
    pool = atom_pool([x0, x1], [k(3, 8), k(2, 4)], 8)
    assert pool == [eq(x0, k(3, 8)), Atom(">=", x0, k(3, 8)), Atom("<=", x0, k(3, 8))]


def test_atom_pool_is_deterministic():
    xs = [u(n, 8) for n in "zyxw"]
    assert atom_pool(xs, [k(1, 8)], 8) == atom_pool(list(reversed(xs)), [k(1, 8)], 8)


def test_refine_skips_present_atoms():
    x = u("x", 8)
    phi = eq(x, k(1, 8))
    out = refine(phi, [x], [k(1, 8)], 8)
    assert out == [conj(phi, Atom(">=", x, k(1, 8))), conj(phi, Atom("<=", x, k(1, 8)))]


FIG5 = corpus("fig5_running_example")


def test_refine_t_uses_constructor_and_path_constants():
    c = instrument(FIG5)
    ctx = RefineContext.of(c)
    assert k(1) in ctx.ctor_constants
    f_path = [p for p in build_paths(c, TRUE, {}) if p.function == "f"][0]
    n = u("n")
    out = refineT(TRUE, f_path, ctx)
    assert le(n, k(100)) in out and eq(n, k(1)) in out and ge(n, k(0)) in out


def test_refine_l_uses_path_variables():
    c = parse(
        "contract T { uint x; function f(uint a) public { uint i = 0; while (i < a) { i = i + 1; } x = i; } }",
        width=8,
    )
    ctx = RefineContext.of(c)
    loop_path = [p for p in build_paths(c, TRUE, {}) if p.start_label == p.end_label][0]
    out = refineL(TRUE, loop_path, ctx)
    i, a = u("i", 8), u("a", 8)
    assert Atom("<=", i, a) not in out  # only x >= y is in the pool
    assert Atom(">=", a, i) in out


def test_generate_dedups_via_seen_and_respects_size_cap():
    c = instrument(FIG5)
    ctx = RefineContext.of(c)
    paths = [p for p in build_paths(c, TRUE, {}) if p.function == "f"]
    seen: set = set()
    first = generate(paths, CandidateInv.make(TRUE), ctx, seen)
    assert first and all(c.size == 1 for c in first)
    assert generate(paths, CandidateInv.make(TRUE), ctx, seen) == []
    assert generate(paths, first[0], ctx, set(), max_atoms=1) == []


def test_generate_skips_internal_paths_for_psi():
    c = parse(
        """contract T { uint x;
        function g(uint a) internal { x = a; }
        function f(uint a) public { x = a; } }""",
        width=8,
    )
    ctx = RefineContext.of(c)
    internal = [p for p in build_paths(c, TRUE, {}) if p.role == "internal"]
    assert internal
    assert generate(internal, CandidateInv.make(TRUE), ctx) == []


def test_workset_orders_by_size_then_fifo():
    x, y = u("x"), u("y")
    W = Workset()
    big = CandidateInv.make(conj(eq(x, k(1)), eq(y, k(1))))
    a = CandidateInv.make(eq(x, k(2)))
    b = CandidateInv.make(eq(y, k(2)))
    for c in (big, a, b):
        assert W.add(c)
    assert not W.add(a)
    assert [choose(W), choose(W), choose(W)] == [a, b, big]
    with pytest.raises(EmptyWorkset):
        W.choose()


def test_workset_cap():
    W = Workset(cap=2)
    cs = [CandidateInv.make(eq(u("x"), k(n))) for n in range(3)]
    assert W.extend(cs) == 2 and len(W) == 2


def test_strengthen_conjoins_and_merges_duplicates():
    x = u("x")
    inv = CandidateInv.make(le(x, k(5)))
    W = Workset()
    W.extend([CandidateInv.make(eq(x, k(1))), CandidateInv.make(le(x, k(5)))])
    strengthen_workset(W, inv.psi, inv.mu)
    got = W.candidates()
    assert got == [inv, CandidateInv.make(conj(eq(x, k(1)), le(x, k(5))))]
