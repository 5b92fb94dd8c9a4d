"""Cheap syntactic simplification applied before any decision procedure.

Only rewrites that hold under modular unsigned semantics are used. Division
and remainder by the constant 0 are left alone.
"""

from __future__ import annotations

from txguard.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    BinOp,
    BoolConst,
    Const,
    Expr,
    Implies,
    Not,
    Or,
    Select,
    Store,
    conj,
    disj,
    max_value,
    neg,
    sort_of,
    transform,
)

_REL_EVAL = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def fold_binop(op: str, a: int, b: int, width: int) -> int | None:
    m = max_value(width)
    if op == "+":
        return (a + b) & m
    if op == "-":
        return (a - b) & m
    if op == "*":
        return (a * b) & m
    if op == "/":
        return None if b == 0 else a // b
    if op == "%":
        return None if b == 0 else a % b
    raise ValueError(op)


def _is(t, value: int) -> bool:
    return isinstance(t, Const) and t.value == value


def _simp_term(e: Expr) -> Expr | None:
    if isinstance(e, BinOp):
        a, b, op = e.left, e.right, e.op
        w = sort_of(a).width  # type: ignore[union-attr]
        if isinstance(a, Const) and isinstance(b, Const):
            v = fold_binop(op, a.value, b.value, w)
            if v is not None:
                return Const(v, w)
            return None
        if op == "+":
            if _is(a, 0):
                return b
            if _is(b, 0):
                return a
        elif op == "-":
            if _is(b, 0):
                return a
            if a == b:
                return Const(0, w)
        elif op == "*":
            if _is(a, 0) or _is(b, 0):
                return Const(0, w)
            if _is(a, 1):
                return b
            if _is(b, 1):
                return a
        elif op == "/":
            if _is(b, 1):
                return a
        elif op == "%":
            if _is(b, 1):
                return Const(0, w)
        return None
    if isinstance(e, Select) and isinstance(e.array, Store) and e.array.index == e.index:
        return e.array.value
    return None


def _simp_atom(e: Atom) -> Expr | None:
    a, b, rel = e.left, e.right, e.rel
    if isinstance(a, Const) and isinstance(b, Const):
        return TRUE if _REL_EVAL[rel](a.value, b.value) else FALSE
    if a == b:
        return TRUE if rel in ("=", "<=", ">=") else FALSE
    s = sort_of(a)
    top = max_value(s.width) if hasattr(s, "width") else None  # type: ignore[union-attr]
    if (rel == ">=" and _is(b, 0)) or (rel == "<=" and _is(a, 0)):
        return TRUE
    if (rel == "<" and _is(b, 0)) or (rel == ">" and _is(a, 0)):
        return FALSE
    if top is not None:
        if (rel == "<=" and _is(b, top)) or (rel == ">=" and _is(a, top)):
            return TRUE
        if (rel == ">" and _is(b, top)) or (rel == "<" and _is(a, top)):
            return FALSE
    return None


def _simp(e: Expr) -> Expr | None:
    if isinstance(e, Atom):
        return _simp_atom(e)
    if isinstance(e, Not):
        if isinstance(e.arg, (BoolConst, Atom)):
            return neg(e.arg)
        return None
    if isinstance(e, Implies):
        p, q = e.premise, e.conclusion
        if p == FALSE or q == TRUE:
            return TRUE
        if p == TRUE:
            return q
        if q == FALSE:
            return neg(p)
        return None
    if isinstance(e, And):
        return conj(e.args)
    if isinstance(e, Or):
        return disj(e.args)
    return _simp_term(e)


def simplify(e: Expr) -> Expr:
    """Bottom-up constant folding and identity elimination."""
    return transform(e, _simp)
