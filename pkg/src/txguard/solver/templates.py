"""Validity templates: syntactic rules that settle common VCs without SMT.

Each template inspects the conclusion of ``F -> q`` and, where needed, the
top-level conjuncts of ``F``. Side conditions on constants are evaluated at
the constants' bit-width. New templates are added by appending a
:class:`Template` to :data:`TEMPLATES`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from txguard.logic import (
    TRUE,
    Atom,
    BinOp,
    Const,
    Expr,
    Formula,
    Implies,
    Select,
    Sum,
    Term,
    Var,
    conjuncts,
    max_value,
)


@dataclass(frozen=True)
class Template:
    name: str
    matches: Callable[[tuple[Formula, ...], Formula], bool]
    doc: str = ""


def as_ge(f: Formula) -> tuple[Term, Term] | None:
    """``(big, small)`` when ``f`` reads ``big >= small``."""
    if isinstance(f, Atom):
        if f.rel == ">=":
            return f.left, f.right
        if f.rel == "<=":
            return f.right, f.left
    return None


def as_eq(f: Formula) -> tuple[Term, Term] | None:
    if isinstance(f, Atom) and f.rel == "=":
        return f.left, f.right
    return None


def _sum_n(premise: tuple[Formula, ...], array: Term) -> Const | None:
    """A constant ``n`` with ``sum(array) = n`` derivable from the conjuncts."""
    equal_consts: dict[Var, Const] = {}
    sums: list[Term] = []
    for c in premise:
        pair = as_eq(c)
        if pair is None:
            continue
        for a, b in (pair, pair[::-1]):
            if isinstance(a, Sum) and a.array == array:
                sums.append(b)
            if isinstance(a, Var) and isinstance(b, Const):
                equal_consts[a] = b
    for e in sums:
        if isinstance(e, Const):
            return e
    for e in sums:
        if isinstance(e, Var) and e in equal_consts:
            return equal_consts[e]
    return None


def _mul_div(q: Formula) -> bool:
    """x >= (x*n1)/n2 with n1 <= n2 (and n2 > 0)."""
    pair = as_ge(q)
    if pair is None:
        return False
    x, rhs = pair
    if not (isinstance(rhs, BinOp) and rhs.op == "/" and isinstance(rhs.right, Const)):
        return False
    prod = rhs.left
    if not (isinstance(prod, BinOp) and prod.op == "*"):
        return False
    for y, n1 in ((prod.left, prod.right), (prod.right, prod.left)):
        if y == x and isinstance(n1, Const):
            n2 = rhs.right
            return 0 < n2.value and n1.value <= n2.value
    return False


def _split_add(t: Term, base: Term) -> Term | None:
    """The other operand when ``t`` is ``base + v`` or ``v + base``."""
    if isinstance(t, BinOp) and t.op == "+":
        if t.left == base:
            return t.right
        if t.right == base:
            return t.left
    return None


def _sum_bounded(premise: tuple[Formula, ...], q: Formula) -> bool:
    """sum(x)=n, x[p]>=v in F  |-  x[q]+v >= x[q], when n+n does not overflow.

    Covers both the direct form and the ``sum(x)=y, y=n`` form.
    """
    pair = as_ge(q)
    if pair is None:
        return False
    big, small = pair
    if not isinstance(small, Select):
        return False
    v = _split_add(big, small)
    if v is None:
        return False
    array = small.array
    n = _sum_n(premise, array)
    if n is None or n.value + n.value > max_value(n.width):
        return False
    for c in premise:
        cp = as_ge(c)
        if cp is not None and isinstance(cp[0], Select) and cp[0].array == array and cp[1] == v:
            return True
    return False


def _sum_direct(premise, q) -> bool:
    return _sum_bounded(tuple(c for c in premise if not _is_var_const_eq(c)), q)


def _sum_via_var(premise, q) -> bool:
    return _sum_bounded(premise, q)


def _is_var_const_eq(c: Formula) -> bool:
    pair = as_eq(c)
    return pair is not None and any(
        isinstance(a, Var) and isinstance(b, Const) for a, b in (pair, pair[::-1])
    )


def _add_mod(q: Formula) -> bool:
    """n1 + (x % n2) >= n1 when n1 + n2 does not overflow (and n2 > 0)."""
    pair = as_ge(q)
    if pair is None:
        return False
    big, n1 = pair
    if not isinstance(n1, Const):
        return False
    rest = _split_add(big, n1)
    if not (isinstance(rest, BinOp) and rest.op == "%" and isinstance(rest.right, Const)):
        return False
    n2 = rest.right
    return n2.value > 0 and n1.value + n2.value <= max_value(n1.width)


TEMPLATES: list[Template] = [
    Template("mul-div-bound", lambda F, q: _mul_div(q), "F -> x >= (x*n1)/n2, n1 <= n2"),
    Template("sum-element-add", _sum_direct, "sum(x)=n, x[p]>=v |- x[q]+v >= x[q]"),
    Template("sum-var-element-add", _sum_via_var, "sum(x)=y, y=n, x[p]>=v |- x[q]+v >= x[q]"),
    Template("const-plus-mod", lambda F, q: _add_mod(q), "F -> n1 + (x % n2) >= n1"),
]


def match_template(vc: Expr) -> Template | None:
    """The first template that proves ``vc`` valid, if any."""
    if isinstance(vc, Implies):
        premise, q = conjuncts(vc.premise), vc.conclusion
    else:
        premise, q = (), vc
    if q == TRUE:
        return None
    for t in TEMPLATES:
        if t.matches(premise, q):
            return t
    return None
