"""Call elimination: bounded inlining plus havoc summaries.

Intra-contract calls are inlined up to a fixed depth, binding parameters to
fresh locals. Calls that are not inlined (too deep, callee too large, or
calls on other contract objects) become :class:`Havoc` statements over the
variables the callee may write.
"""

from __future__ import annotations

from dataclasses import replace
from itertools import count

from txguard.lang.ast import (
    ArrAssign,
    Assign,
    Call,
    Contract,
    Function,
    Havoc,
    SKIP,
    Stmt,
    While,
    iter_stmts,
    map_stmts,
    seq,
    statement_count,
)
from txguard.logic import (
    BitVec,
    Formula,
    TRUE,
    Var,
    conj,
    conjuncts,
    free_vars,
    rename,
)

MAX_INLINE_STATEMENTS = 20


def may_write(c: Contract) -> dict[str, frozenset[str]]:
    """Transitive, field-insensitive may-write sets over global names."""
    globals_ = {g.name for g in c.globals}
    direct: dict[str, set[str]] = {}
    calls: dict[str, set[str]] = {}
    for f in c.all_functions:
        w: set[str] = set()
        callees: set[str] = set()
        for s in iter_stmts(f.body):
            if isinstance(s, (Assign, ArrAssign)) and s.target.name in globals_:
                w.add(s.target.name)
            elif isinstance(s, Havoc):
                w.update(n for n in s.names if n in globals_)
            elif isinstance(s, Call):
                if s.receiver is not None and s.receiver.name in globals_:
                    w.add(s.receiver.name)
                if s.obj is None:
                    callees.add(s.name)
        direct[f.name] = w
        calls[f.name] = callees
    changed = True
    while changed:
        changed = False
        for f, callees in calls.items():
            for g in callees:
                extra = direct.get(g, set()) - direct[f]
                if extra:
                    direct[f] |= extra
                    changed = True
    return {f: frozenset(w) for f, w in direct.items()}


def havoc_summary(pre: Formula, written, receiver: Var | None = None) -> Formula:
    """Weaken ``pre`` by dropping conjuncts that mention a clobbered variable.

    Only current (unprimed) occurrences count: older versions name values
    that the call cannot change.
    """
    names = set(written)
    if receiver is not None:
        names.add(receiver.name)
    if not names:
        return pre
    kept = []
    for a in conjuncts(pre):
        hit = any(
            isinstance(v, Var) and v.version == 0 and v.name in names for v in free_vars(a)
        )
        kept.append(TRUE if hit else a)
    return conj(kept)


class _Inliner:
    def __init__(self, c: Contract, depth: int, max_statements: int):
        self.c = c
        self.depth = depth
        self.max_statements = max_statements
        self.mod = may_write(c)
        self.globals = {g.name for g in c.globals}
        self.fresh = count(1)
        self.havocked: set[str] = set()
        self.inlined: set[str] = set()
        self.new_locals: list[Var] = []

    def expand(self, s: Stmt, depth: int) -> Stmt:
        def visit(x: Stmt) -> Stmt:
            if isinstance(x, Call):
                return self.call(x, depth)
            return x

        return map_stmts(s, visit)

    def call(self, call: Call, depth: int) -> Stmt:
        if call.obj is not None:
            # Another contract: only the return value is unknown.
            if call.receiver is None:
                return SKIP
            return Havoc((call.receiver.name,), call.loc)
        callee = self.c.function(call.name)
        if depth <= 0 or statement_count(callee.body) > self.max_statements:
            self.havocked.add(callee.name)
            names = set(self.mod[callee.name])
            if call.receiver is not None:
                names.add(call.receiver.name)
            return Havoc(tuple(sorted(names)), call.loc) if names else SKIP
        self.inlined.add(callee.name)
        return self.inline(callee, call, depth)

    def inline(self, g: Function, call: Call, depth: int) -> Stmt:
        k = next(self.fresh)
        mapping: dict[Var, Var] = {}

        def local(v: Var) -> Var:
            if v not in mapping:
                nv = Var(f"{v.name}@{k}", v.sort)
                mapping[v] = nv
                self.new_locals.append(nv)
            return mapping[v]

        for v in (*g.params, *g.locals):
            local(v)
        if g.returns is not None:
            local(g.returns)
        for s in iter_stmts(g.body):
            for e in _exprs(s):
                for v in free_vars(e):
                    if isinstance(v, Var) and v.name not in self.globals and not v.name.startswith("msg."):
                        local(v)
        binds: list[Stmt] = []
        for p, a in zip(g.params, call.args):
            binds.append(Assign(mapping[p], a, call.loc))
            if isinstance(a, Var) and not isinstance(p.sort, BitVec):
                lp = Var(f"{p.name}.length", BitVec(self.c.width))
                la = Var(f"{a.name}.length", BitVec(self.c.width))
                binds.append(Assign(local(lp), la, call.loc))
        body = self.expand(g.body, depth - 1)
        body = _rename_stmt(body, mapping, k)
        out = [*binds, body]
        if call.receiver is not None:
            if g.returns is None:
                out.append(Havoc((call.receiver.name,), call.loc))
            else:
                out.append(Assign(call.receiver, mapping[g.returns], call.loc))
        return seq(*out)


def _exprs(s: Stmt):
    from txguard.lang.ast import Assert, Assume, If

    if isinstance(s, Assign):
        return (s.target, s.value)
    if isinstance(s, ArrAssign):
        return (s.target, *s.indices, s.value)
    if isinstance(s, (Assume, Assert, If, While)):
        return (s.cond,)
    if isinstance(s, Call):
        return (*s.args, *((s.receiver,) if s.receiver is not None else ()))
    return ()


def _rename_stmt(s: Stmt, mapping: dict[Var, Var], k: int) -> Stmt:
    from txguard.lang.ast import Assert, Assume, If

    names = {v.name: w.name for v, w in mapping.items()}

    def visit(x: Stmt) -> Stmt:
        if isinstance(x, Assign):
            return Assign(mapping.get(x.target, x.target), rename(x.value, mapping), x.loc)
        if isinstance(x, ArrAssign):
            return ArrAssign(
                mapping.get(x.target, x.target),
                tuple(rename(i, mapping) for i in x.indices),
                rename(x.value, mapping),
                x.loc,
            )
        if isinstance(x, Assume):
            return Assume(rename(x.cond, mapping), x.loc)
        if isinstance(x, Assert):
            return Assert(rename(x.cond, mapping), x.meta, x.loc)
        if isinstance(x, If):
            return If(rename(x.cond, mapping), x.then, x.orelse, x.loc)
        if isinstance(x, While):
            return While(f"{x.label}@{k}", rename(x.cond, mapping), x.body, x.loc)
        if isinstance(x, Havoc):
            return Havoc(tuple(names.get(n, n) for n in x.names), x.loc)
        return x

    return map_stmts(s, visit)


def inline_calls(c: Contract, depth: int = 2, max_statements: int = MAX_INLINE_STATEMENTS) -> Contract:
    """Eliminate every call statement.

    Internal functions that were inlined at every call site are dropped;
    the rest stay and are analysed on their own.
    """
    if depth not in (0, 1, 2):
        raise ValueError("inline depth must be 0, 1 or 2")
    inl = _Inliner(c, depth, max_statements)
    called = {
        s.name
        for f in c.all_functions
        for s in iter_stmts(f.body)
        if isinstance(s, Call) and s.obj is None
    }
    bodies: dict[str, Function] = {}
    for f in c.all_functions:
        inl.new_locals = []
        body = inl.expand(f.body, depth)
        bodies[f.name] = replace(f, body=body, locals=f.locals + tuple(inl.new_locals))
    kept = tuple(
        bodies[f.name]
        for f in c.functions
        if f.is_public or f.name in inl.havocked or f.name not in called
    )
    return replace(c, constructor=bodies[c.constructor.name], functions=kept)


def has_calls(c: Contract) -> bool:
    return any(isinstance(s, Call) for f in c.all_functions for s in iter_stmts(f.body))
