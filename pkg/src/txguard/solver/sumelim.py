"""Elimination of the ``sum`` symbol by partition-guarded case analysis.

Every equality ``sum(x) = e`` is replaced by constraints over the finitely
many cells of ``x`` the formula can observe plus a fresh "rest" term ``R``
and a fresh flag ``B`` (the rest does not overflow).

Array versions produced by the strongest postcondition (``x = x'<i <| v>``)
are grouped into one component via union-find over store equalities; all
members share the same ``R`` and ``B``, because stores only touch indices
that are themselves part of the observed index set.
"""

from __future__ import annotations

from typing import Iterator

from txguard.logic import (
    ArraySort,
    Atom,
    BinOp,
    BoolVar,
    Expr,
    Formula,
    Select,
    Store,
    Sum,
    Term,
    Var,
    conj,
    implies,
    pretty,
    sort_of,
    transform,
    walk,
)

MAX_INDEX_SET = 6


class UnsupportedSumShape(ValueError):
    pass


def set_partitions(items: list) -> Iterator[list[list]]:
    """All partitions of ``items``; blocks keep the input order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for k in range(len(p)):
            yield p[:k] + [[first] + p[k]] + p[k + 1:]


def _sorted_partitions(items: list) -> list[list[list]]:
    """Coarsest first, mirroring the order used in hand-worked examples."""
    order = {x: i for i, x in enumerate(items)}
    parts = []
    for p in set_partitions(items):
        blocks = [sorted(b, key=order.__getitem__) for b in p]
        blocks.sort(key=lambda b: order[b[0]])
        parts.append(blocks)
    parts.sort(key=lambda p: (len(p), [[order[x] for x in b] for b in p]))
    return parts


def _root(t: Term) -> Var | None:
    while isinstance(t, Store):
        t = t.array
    return t if isinstance(t, Var) else None


class _UnionFind:
    def __init__(self):
        self.parent: dict[Var, Var] = {}

    def find(self, x: Var) -> Var:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: Var, b: Var) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Deterministic representative: the smaller printed name.
            if (ra.name, ra.version) > (rb.name, rb.version):
                ra, rb = rb, ra
            self.parent[rb] = ra


def _is_array(t: Term) -> bool:
    return isinstance(sort_of(t), ArraySort)


def components(f: Expr) -> _UnionFind:
    uf = _UnionFind()
    for n in walk(f):
        if isinstance(n, Var) and isinstance(n.sort, ArraySort):
            uf.find(n)
        if isinstance(n, Atom) and n.rel == "=" and _is_array(n.left):
            a, b = _root(n.left), _root(n.right)
            if a is not None and b is not None:
                uf.union(a, b)
    return uf


def index_terms(f: Expr, uf: _UnionFind, comp: Var) -> list[Term]:
    """Index terms used with any member of ``comp``, in first-seen order."""
    seen: dict[Term, None] = {}
    for n in walk(f):
        if isinstance(n, (Select, Store)):
            r = _root(n.array)
            if r is not None and uf.find(r) == comp:
                seen.setdefault(n.index, None)
    return list(seen)


def _plus(terms: list[Term]) -> Term:
    out = terms[0]
    for t in terms[1:]:
        out = BinOp("+", out, t)
    return out


def _guard(blocks: list[list[Term]]) -> Formula:
    parts: list[Formula] = []
    for b in blocks:
        for i in range(len(b)):
            for j in range(i + 1, len(b)):
                parts.append(Atom("=", b[i], b[j]))
    for u in range(len(blocks)):
        for v in range(u + 1, len(blocks)):
            for i in blocks[u]:
                for j in blocks[v]:
                    parts.append(Atom("!=", i, j))
    return conj(parts)


def _no_overflow(cells: list[Term]) -> Formula:
    """Each partial sum is at least the previous one (no wrap-around)."""
    return conj(
        Atom(">=", _plus(cells[: c + 1]), _plus(cells[:c])) for c in range(1, len(cells))
    )


def encode_sum_eq(x: Term, e: Term, index: list[Term], R: Var, B: BoolVar) -> Formula:
    """The replacement ``G1 and G2`` for ``sum(x) = e``."""
    if not index:
        return conj(Atom("=", R, e), B)
    if len(index) == 1:
        cell = Select(x, index[0])
        total = BinOp("+", cell, R)
        return conj(Atom("=", total, e), Atom(">=", total, R), B)
    g1: list[Formula] = []
    g2: list[Formula] = []
    for blocks in _sorted_partitions(index):
        guard = _guard(blocks)
        cells = [Select(x, b[0]) for b in blocks]
        total = BinOp("+", _plus(cells), R)
        g1.append(implies(guard, Atom("=", total, e)))
        g2.append(implies(guard, conj(_no_overflow(cells), Atom(">=", total, R))))
    return conj(*g1, *g2, B)


def _comp_name(v: Var) -> str:
    return f"{v.name}{chr(39) * v.version}"


def eliminate_sum(f: Formula) -> Formula:
    """Replace every ``sum(x) = e`` atom; the result contains no ``sum``."""
    if not any(isinstance(n, Sum) for n in walk(f)):
        return f
    uf = components(f)
    cache: dict[Var, tuple[list[Term], Var, BoolVar]] = {}
    opaque: dict[Atom, BoolVar] = {}

    def ctx(x: Term):
        r = _root(x)
        if r is None:
            raise UnsupportedSumShape(f"sum over a non-variable array: {pretty(x)}")
        comp = uf.find(r)
        if comp not in cache:
            elem = sort_of(x).elem  # type: ignore[union-attr]
            tag = _comp_name(comp)
            cache[comp] = (
                index_terms(f, uf, comp),
                Var(f"$R.{tag}", elem),
                BoolVar(f"$B.{tag}"),
            )
        return cache[comp]

    def rewrite(n: Expr) -> Expr | None:
        if isinstance(n, Atom) and (isinstance(n.left, Sum) or isinstance(n.right, Sum)):
            if n.rel != "=":
                raise UnsupportedSumShape(f"sum outside an equality: {pretty(n)}")
            if isinstance(n.left, Sum) and isinstance(n.right, Sum):
                raise UnsupportedSumShape(f"sum on both sides: {pretty(n)}")
            s, e = (n.left, n.right) if isinstance(n.left, Sum) else (n.right, n.left)
            index, R, B = ctx(s.array)
            if len(index) > MAX_INDEX_SET:
                # Too many cases: abstract the atom by an unconstrained flag.
                return opaque.setdefault(n, BoolVar(f"$S{len(opaque)}"))
            return encode_sum_eq(s.array, e, index, R, B)
        if isinstance(n, Sum):
            return None
        return None

    out = transform(f, rewrite)
    if any(isinstance(n, Sum) for n in walk(out)):
        raise UnsupportedSumShape("sum occurs outside an equality atom")
    return out


__all__ = [
    "MAX_INDEX_SET",
    "UnsupportedSumShape",
    "components",
    "eliminate_sum",
    "encode_sum_eq",
    "index_terms",
    "set_partitions",
]
