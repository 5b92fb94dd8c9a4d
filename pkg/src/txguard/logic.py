"""Quantifier-free formulas over fixed-width bitvectors and arrays.

Terms and formulas are immutable, hashable trees. Program expressions are
represented directly as terms (version 0 variables); the strongest
postcondition transformer introduces older versions (``x'``, ``x''``...)
by bumping :attr:`Var.version`.

Arithmetic is unsigned and wraps at ``2**width``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Union


# ---------------------------------------------------------------------------
# Sorts

@dataclass(frozen=True)
class BitVec:
    width: int

    def __str__(self) -> str:
        return f"bv{self.width}"


@dataclass(frozen=True)
class ArraySort:
    index: "Sort"
    elem: "Sort"

    def __str__(self) -> str:
        return f"[{self.index} -> {self.elem}]"


Sort = Union[BitVec, ArraySort]


def max_value(width: int) -> int:
    return (1 << width) - 1


# ---------------------------------------------------------------------------
# Terms

class _Node:
    """Caches the structural hash; dataclass equality stays structural."""

    __slots__ = ()

    def __hash__(self) -> int:
        try:
            return self._h  # type: ignore[attr-defined]
        except AttributeError:
            h = hash((type(self).__name__,) + self._fields())  # type: ignore[attr-defined]
            object.__setattr__(self, "_h", h)
            return h


def _node(cls):
    cls = dataclass(frozen=True, eq=True)(cls)
    names = [f.name for f in cls.__dataclass_fields__.values() if f.compare]

    def _fields(self):
        return tuple(getattr(self, n) for n in names)

    cls._fields = _fields
    cls.__hash__ = _Node.__hash__
    return cls


@_node
class Var(_Node):
    name: str
    sort: Sort = field(compare=True)
    version: int = 0

    def primed(self, version: int) -> "Var":
        return Var(self.name, self.sort, version)

    @property
    def current(self) -> "Var":
        return Var(self.name, self.sort, 0)


@_node
class Const(_Node):
    value: int
    width: int

    def __post_init__(self) -> None:
        if not 0 <= self.value <= max_value(self.width):
            raise ValueError(f"constant {self.value} does not fit in {self.width} bits")


ARITH_OPS = ("+", "-", "*", "/", "%")


@_node
class BinOp(_Node):
    op: str
    left: "Term"
    right: "Term"
    loc: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@_node
class Select(_Node):
    array: "Term"
    index: "Term"


@_node
class Store(_Node):
    array: "Term"
    index: "Term"
    value: "Term"


@_node
class Sum(_Node):
    array: "Term"


Term = Union[Var, Const, BinOp, Select, Store, Sum]


def sort_of(t: Term) -> Sort:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, Const):
        return BitVec(t.width)
    if isinstance(t, BinOp):
        return sort_of(t.left)
    if isinstance(t, Select):
        s = sort_of(t.array)
        assert isinstance(s, ArraySort)
        return s.elem
    if isinstance(t, Store):
        return sort_of(t.array)
    if isinstance(t, Sum):
        s = sort_of(t.array)
        assert isinstance(s, ArraySort)
        return s.elem
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Formulas

RELATIONS = ("=", "!=", "<=", "<", ">=", ">")
_NEGATED = {"=": "!=", "!=": "=", "<=": ">", "<": ">=", ">=": "<", ">": "<="}
_FLIPPED = {"=": "=", "!=": "!=", "<=": ">=", "<": ">", ">=": "<=", ">": "<"}


@_node
class Atom(_Node):
    rel: str
    left: Term
    right: Term


@_node
class BoolVar(_Node):
    name: str


@_node
class BoolConst(_Node):
    value: bool


@_node
class Not(_Node):
    arg: "Formula"


@_node
class And(_Node):
    args: tuple["Formula", ...]


@_node
class Or(_Node):
    args: tuple["Formula", ...]


@_node
class Implies(_Node):
    premise: "Formula"
    conclusion: "Formula"


Formula = Union[Atom, BoolVar, BoolConst, Not, And, Or, Implies]
Expr = Union[Term, Formula]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def flip(rel: str) -> str:
    """Relation with swapped operands: ``a < b`` iff ``b > a``."""
    return _FLIPPED[rel]


# ---------------------------------------------------------------------------
# Canonical ordering and smart constructors

@lru_cache(maxsize=200_000)
def canon_key(e: Expr) -> str:
    return pretty(e)


def conj(*parts: Formula | Iterable[Formula]) -> Formula:
    """Flattened, deduplicated, canonically sorted conjunction."""
    out: dict[Formula, None] = {}
    for p in _iter_args(parts):
        if isinstance(p, And):
            for q in p.args:
                out[q] = None
        elif p == TRUE:
            continue
        elif p == FALSE:
            return FALSE
        else:
            out[p] = None
    if not out:
        return TRUE
    if len(out) == 1:
        return next(iter(out))
    return And(tuple(sorted(out, key=canon_key)))


def disj(*parts: Formula | Iterable[Formula]) -> Formula:
    out: dict[Formula, None] = {}
    for p in _iter_args(parts):
        if isinstance(p, Or):
            for q in p.args:
                out[q] = None
        elif p == FALSE:
            continue
        elif p == TRUE:
            return TRUE
        else:
            out[p] = None
    if not out:
        return FALSE
    if len(out) == 1:
        return next(iter(out))
    return Or(tuple(sorted(out, key=canon_key)))


def _iter_args(parts) -> Iterator[Formula]:
    for p in parts:
        if isinstance(p, (list, tuple, set, frozenset)) or hasattr(p, "__next__"):
            yield from p
        else:
            yield p


def implies(p: Formula, q: Formula) -> Formula:
    return Implies(p, q)


def neg(f: Formula) -> Formula:
    """Negation pushed to the atoms (relations are flipped, not wrapped)."""
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Atom):
        return Atom(_NEGATED[f.rel], f.left, f.right)
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, And):
        return disj(neg(a) for a in f.args)
    if isinstance(f, Or):
        return conj(neg(a) for a in f.args)
    if isinstance(f, Implies):
        return conj(f.premise, neg(f.conclusion))
    return Not(f)


def conjuncts(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, And):
        return f.args
    if f == TRUE:
        return ()
    return (f,)


# Convenience term builders used by the instrumenter and the tests.

def add(a: Term, b: Term) -> BinOp:
    return BinOp("+", a, b)


def sub(a: Term, b: Term) -> BinOp:
    return BinOp("-", a, b)


def mul(a: Term, b: Term) -> BinOp:
    return BinOp("*", a, b)


def div(a: Term, b: Term) -> BinOp:
    return BinOp("/", a, b)


def eq(a: Term, b: Term) -> Atom:
    return Atom("=", a, b)


def ne(a: Term, b: Term) -> Atom:
    return Atom("!=", a, b)


def ge(a: Term, b: Term) -> Atom:
    return Atom(">=", a, b)


def le(a: Term, b: Term) -> Atom:
    return Atom("<=", a, b)


def lt(a: Term, b: Term) -> Atom:
    return Atom("<", a, b)


def gt(a: Term, b: Term) -> Atom:
    return Atom(">", a, b)


# ---------------------------------------------------------------------------
# Traversal

def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Var, Const, BoolVar, BoolConst)):
        return ()
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Select):
        return (e.array, e.index)
    if isinstance(e, Store):
        return (e.array, e.index, e.value)
    if isinstance(e, Sum):
        return (e.array,)
    if isinstance(e, Atom):
        return (e.left, e.right)
    if isinstance(e, Not):
        return (e.arg,)
    if isinstance(e, (And, Or)):
        return e.args
    if isinstance(e, Implies):
        return (e.premise, e.conclusion)
    raise TypeError(f"not an expression: {e!r}")


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def transform(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Bottom-up rebuild; ``fn`` may return a replacement or None."""
    memo: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        kids = children(node)
        if kids:
            new_kids = tuple(go(k) for k in kids)
            if any(a is not b for a, b in zip(kids, new_kids)):
                node2 = _rebuild(node, new_kids)
            else:
                node2 = node
        else:
            node2 = node
        out = fn(node2)
        if out is None:
            out = node2
        memo[node] = out
        return out

    return go(e)


def _rebuild(node: Expr, kids: tuple) -> Expr:
    if isinstance(node, BinOp):
        return BinOp(node.op, kids[0], kids[1], node.loc)
    if isinstance(node, Select):
        return Select(*kids)
    if isinstance(node, Store):
        return Store(*kids)
    if isinstance(node, Sum):
        return Sum(kids[0])
    if isinstance(node, Atom):
        return Atom(node.rel, kids[0], kids[1])
    if isinstance(node, Not):
        return Not(kids[0])
    if isinstance(node, And):
        return conj(kids)
    if isinstance(node, Or):
        return disj(kids)
    if isinstance(node, Implies):
        return Implies(kids[0], kids[1])
    raise TypeError(node)


def rename(e: Expr, mapping: Mapping[Var, Term]) -> Expr:
    """Simultaneous substitution of variables."""
    if not mapping:
        return e
    return transform(e, lambda n: mapping.get(n) if isinstance(n, Var) else None)


def subst(e: Expr, x: Var, r: Term) -> Expr:
    """``e[r/x]``: replace every occurrence of ``x`` by ``r``."""
    if sort_of(r) != x.sort:
        raise TypeError(f"cannot substitute {pretty(r)} for {pretty(x)}: sort mismatch")
    return rename(e, {x: r})


def free_vars(e: Expr) -> frozenset[Var | BoolVar]:
    return frozenset(n for n in walk(e) if isinstance(n, (Var, BoolVar)))


def constants(e: Expr) -> frozenset[Const]:
    return frozenset(n for n in walk(e) if isinstance(n, Const))


def max_version(e: Expr, name: str) -> int:
    return max((n.version for n in walk(e) if isinstance(n, Var) and n.name == name), default=0)


def mentions_current(e: Expr, names: Iterable[str]) -> bool:
    names = set(names)
    return any(isinstance(n, Var) and n.version == 0 and n.name in names for n in walk(e))


# ---------------------------------------------------------------------------
# Pretty printing

_REL_TEXT = {"=": "=", "!=": "≠", "<=": "≤", "<": "<", ">=": "≥", ">": ">"}
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def _var_text(v: Var) -> str:
    return v.name + "'" * v.version


def pretty(e: Expr) -> str:
    if isinstance(e, Var):
        return _var_text(e)
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, BinOp):
        return f"{_operand(e.left, e.op, False)}{e.op}{_operand(e.right, e.op, True)}"
    if isinstance(e, Select):
        return f"{pretty(e.array)}[{pretty(e.index)}]"
    if isinstance(e, Store):
        return f"{pretty(e.array)}⟨{pretty(e.index)} ◁ {pretty(e.value)}⟩"
    if isinstance(e, Sum):
        return f"sum({pretty(e.array)})"
    if isinstance(e, Atom):
        return f"{pretty(e.left)} {_REL_TEXT[e.rel]} {pretty(e.right)}"
    if isinstance(e, BoolVar):
        return e.name
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Not):
        return f"¬{_wrap(e.arg)}"
    if isinstance(e, And):
        return " ∧ ".join(_wrap(a) for a in e.args)
    if isinstance(e, Or):
        return " ∨ ".join(_wrap(a) for a in e.args)
    if isinstance(e, Implies):
        return f"{_wrap(e.premise)} → {_wrap(e.conclusion)}"
    raise TypeError(f"not an expression: {e!r}")


def _operand(t: Term, op: str, right: bool) -> str:
    s = pretty(t)
    if isinstance(t, BinOp):
        p, q = _PREC[t.op], _PREC[op]
        if p < q or (right and p == q):
            return f"({s})"
    return s


def _wrap(f: Formula) -> str:
    s = pretty(f)
    if isinstance(f, (And, Or, Implies)):
        return f"({s})"
    return s
