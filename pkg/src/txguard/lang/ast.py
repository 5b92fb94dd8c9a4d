"""Statements of the core contract language.

Expressions are :mod:`txguard.logic` terms and formulas over version-0
variables. Source locations are carried along but never take part in
equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from txguard.logic import Formula, Term, Var

Loc = tuple[int, int]

QUERY_KINDS = (
    "add-overflow",
    "sub-underflow",
    "mul-overflow",
    "div-by-zero",
    "access-control",
    "user",
)


@dataclass(frozen=True, order=True)
class QueryMeta:
    id: int
    kind: str
    loc: Loc

    @property
    def line(self) -> int:
        return self.loc[0]

    def __str__(self) -> str:
        return f"#{self.id} {self.kind}@{self.loc[0]}:{self.loc[1]}"


@dataclass(frozen=True)
class Assign:
    target: Var
    value: Term
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ArrAssign:
    """``x[i1][i2]... := e``; a single index is the paper's ``x[y] := e``."""

    target: Var
    indices: tuple[Term, ...]
    value: Term
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assume:
    cond: Formula
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assert:
    cond: Formula
    meta: QueryMeta | None = None
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Havoc:
    """Conservative summary of a call that was not inlined."""

    names: tuple[str, ...]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: Formula
    then: "Stmt"
    orelse: "Stmt"
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class While:
    label: str
    cond: Formula
    body: "Stmt"
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Seq:
    stmts: tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class Call:
    """Call statement; ``obj`` is set for calls on another contract object."""

    name: str
    args: tuple[Term, ...]
    receiver: Var | None = None
    obj: str | None = None
    loc: Loc | None = field(default=None, compare=False)


AtomicStmt = Union[Assign, ArrAssign, Assume, Assert, Havoc]
Stmt = Union[Assign, ArrAssign, Assume, Assert, Havoc, If, While, Seq, Call]

SKIP = Seq(())


def seq(*stmts: Stmt) -> Stmt:
    flat: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        else:
            flat.append(s)
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[Var, ...]
    body: Stmt
    visibility: str = "public"
    is_constructor: bool = False
    returns: Var | None = None
    locals: tuple[Var, ...] = ()
    loc: Loc | None = field(default=None, compare=False)

    @property
    def entry(self) -> str:
        return f"entry_{self.name}"

    @property
    def exit(self) -> str:
        return f"exit_{self.name}"

    @property
    def is_public(self) -> bool:
        return self.visibility in ("public", "external")


@dataclass(frozen=True)
class GlobalDecl:
    var: Var
    type: str  # source-level type text, e.g. "mapping(address=>uint)"

    @property
    def name(self) -> str:
        return self.var.name


@dataclass(frozen=True)
class Contract:
    name: str
    globals: tuple[GlobalDecl, ...]
    constructor: Function
    functions: tuple[Function, ...]
    width: int = 256
    address_width: int = 160

    @property
    def all_functions(self) -> tuple[Function, ...]:
        return (self.constructor,) + self.functions

    def function(self, name: str) -> Function:
        for f in self.all_functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def global_vars(self) -> tuple[Var, ...]:
        return tuple(g.var for g in self.globals)

    def replace_functions(self, fns: dict[str, Function]) -> "Contract":
        from dataclasses import replace

        return replace(
            self,
            constructor=fns.get(self.constructor.name, self.constructor),
            functions=tuple(fns.get(f.name, f) for f in self.functions),
        )


# ---------------------------------------------------------------------------
# Traversal helpers

def iter_stmts(s: Stmt) -> Iterator[Stmt]:
    """Pre-order over all statement nodes."""
    yield s
    if isinstance(s, Seq):
        for c in s.stmts:
            yield from iter_stmts(c)
    elif isinstance(s, If):
        yield from iter_stmts(s.then)
        yield from iter_stmts(s.orelse)
    elif isinstance(s, While):
        yield from iter_stmts(s.body)


def map_stmts(s: Stmt, fn) -> Stmt:
    """Rebuild bottom-up; ``fn`` maps each non-Seq node to a statement."""
    if isinstance(s, Seq):
        return seq(*(map_stmts(c, fn) for c in s.stmts))
    if isinstance(s, If):
        s = If(s.cond, map_stmts(s.then, fn), map_stmts(s.orelse, fn), s.loc)
    elif isinstance(s, While):
        s = While(s.label, s.cond, map_stmts(s.body, fn), s.loc)
    return fn(s)


def queries(c: Contract) -> list[QueryMeta]:
    """Every query in the contract, ordered by id."""
    seen: dict[int, QueryMeta] = {}
    for f in c.all_functions:
        for s in iter_stmts(f.body):
            if isinstance(s, Assert) and s.meta is not None:
                seen[s.meta.id] = s.meta
    return [seen[k] for k in sorted(seen)]


def loop_labels(c: Contract) -> list[str]:
    return [s.label for f in c.all_functions for s in iter_stmts(f.body) if isinstance(s, While)]


def statement_count(s: Stmt) -> int:
    """Source statements, not counting generated queries or sequencing."""
    n = 0
    for x in iter_stmts(s):
        if isinstance(x, Seq):
            continue
        if isinstance(x, Assert) and x.meta is not None and x.meta.kind != "user":
            continue
        n += 1
    return n
