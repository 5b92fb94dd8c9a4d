"""Safety-query instrumentation.

Arithmetic queries are inserted before the atomic statement that evaluates
the guarded expression, in post-order (operands before the operation, left
before right). Conditions of ``if``/``while`` are hoisted: their queries run
before the branch, and for loops again at the end of the body.
"""

from __future__ import annotations

from dataclasses import replace
from itertools import count

from txguard.lang.ast import (
    ArrAssign,
    Assert,
    Assign,
    Assume,
    Call,
    Contract,
    Function,
    If,
    Loc,
    QueryMeta,
    Seq,
    Stmt,
    While,
    map_stmts,
    seq,
)
from txguard.logic import (
    Atom,
    BinOp,
    BitVec,
    Const,
    Expr,
    Formula,
    Var,
    children,
    conj,
    disj,
    sort_of,
)

MSG_SENDER = "msg.sender"


def query_condition(e: BinOp) -> tuple[str, Formula]:
    """The safety condition guarding one arithmetic operation."""
    a, b = e.left, e.right
    zero = Const(0, sort_of(a).width)  # type: ignore[union-attr]
    if e.op == "+":
        return "add-overflow", Atom(">=", BinOp("+", a, b), a)
    if e.op == "-":
        return "sub-underflow", Atom(">=", a, b)
    if e.op == "*":
        exact = Atom("=", BinOp("/", BinOp("*", a, b), a), b)
        return "mul-overflow", disj(Atom("=", a, zero), conj(Atom("!=", a, zero), exact))
    if e.op in ("/", "%"):
        return "div-by-zero", Atom("!=", b, zero)
    raise ValueError(f"unknown operator {e.op!r}")


class _Ids:
    def __init__(self, start: int):
        self._it = count(start)

    def meta(self, kind: str, loc: Loc | None) -> QueryMeta:
        return QueryMeta(next(self._it), kind, loc or (0, 0))


def _arith_ops(e: Expr) -> list[BinOp]:
    """Arithmetic subexpressions in evaluation (post-)order."""
    out: list[BinOp] = []

    def go(n: Expr) -> None:
        for k in children(n):
            go(k)
        if isinstance(n, BinOp):
            out.append(n)

    go(e)
    return out


def _queries(exprs, ids: _Ids, loc: Loc | None) -> list[Stmt]:
    out: list[Stmt] = []
    for e in exprs:
        for op in _arith_ops(e):
            kind, cond = query_condition(op)
            where = op.loc or loc
            out.append(Assert(cond, ids.meta(kind, where), where))
    return out


def _max_id(c: Contract) -> int:
    from txguard.lang.ast import queries

    qs = queries(c)
    return max((q.id for q in qs), default=-1) + 1


def instrument_arith(c: Contract, width: int | None = None) -> Contract:
    """Insert over/underflow and division-by-zero queries."""
    if width is not None and width != c.width:
        raise ValueError(f"contract was parsed at width {c.width}, not {width}")
    ids = _Ids(_max_id(c))

    def visit(s: Stmt) -> Stmt:
        if isinstance(s, Assign):
            pre = _queries([s.value], ids, s.loc)
        elif isinstance(s, ArrAssign):
            pre = _queries([*s.indices, s.value], ids, s.loc)
        elif isinstance(s, (Assume, Assert)):
            pre = _queries([s.cond], ids, s.loc)
        elif isinstance(s, Call):
            pre = _queries(s.args, ids, s.loc)
        elif isinstance(s, If):
            pre = _queries([s.cond], ids, s.loc)
        elif isinstance(s, While):
            pre = _queries([s.cond], ids, s.loc)
            if pre:
                # Same queries (same metadata) re-checked before each re-test.
                return seq(*pre, While(s.label, s.cond, seq(s.body, *pre), s.loc))
            return s
        else:
            return s
        return seq(*pre, s) if pre else s

    return _map_functions(c, lambda f: replace(f, body=map_stmts(f.body, visit)))


def instrument_access(c: Contract) -> Contract:
    """Guard writes to global address variables outside the constructor."""
    addr_globals = {
        g.name: g.var
        for g in c.globals
        if isinstance(g.var.sort, BitVec) and g.type == "address"
    }
    if not addr_globals:
        return c
    ids = _Ids(_max_id(c))
    sender = Var(MSG_SENDER, BitVec(c.address_width))

    def visit(s: Stmt) -> Stmt:
        if isinstance(s, Assign) and s.target.name in addr_globals:
            cond = Atom("=", sender, addr_globals[s.target.name])
            return seq(Assert(cond, ids.meta("access-control", s.loc), s.loc), s)
        return s

    def per_function(f: Function) -> Function:
        if f.is_constructor:
            return f
        return replace(f, body=map_stmts(f.body, visit))

    return _map_functions(c, per_function)


def renumber_queries(c: Contract) -> Contract:
    """Make query ids dense, in contract order; shared metadata stays shared."""
    mapping: dict[QueryMeta, QueryMeta] = {}
    nxt = count()

    def visit(s: Stmt) -> Stmt:
        if isinstance(s, Assert) and s.meta is not None:
            new = mapping.get(s.meta)
            if new is None:
                new = mapping[s.meta] = replace(s.meta, id=next(nxt))
            return Assert(s.cond, new, s.loc)
        return s

    return _map_functions(c, lambda f: replace(f, body=map_stmts(f.body, visit)))


def instrument(c: Contract, checks=("arith",)) -> Contract:
    """Apply the selected checkers and number the queries densely."""
    if "arith" in checks:
        c = instrument_arith(c)
    if "access" in checks:
        c = instrument_access(c)
    return renumber_queries(c)


def strip_queries(s: Stmt) -> Stmt:
    """Remove generated queries (user asserts stay)."""

    def visit(x: Stmt) -> Stmt:
        if isinstance(x, Assert) and x.meta is not None and x.meta.kind != "user":
            return Seq(())
        if isinstance(x, While) and isinstance(x.body, Seq):
            return While(x.label, x.cond, seq(*x.body.stmts), x.loc)
        return x

    return map_stmts(s, visit)


def _map_functions(c: Contract, fn) -> Contract:
    return c.replace_functions({f.name: fn(f) for f in c.all_functions})


__all__ = [
    "instrument",
    "instrument_access",
    "instrument_arith",
    "query_condition",
    "renumber_queries",
    "strip_queries",
]
