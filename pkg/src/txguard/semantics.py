"""Concrete evaluation of terms and formulas.

Bit-vector arithmetic wraps at ``2**width``; division and remainder by zero
follow SMT-LIB (``x / 0 = max``, ``x % 0 = x``). ``sum`` denotes the exact
integer sum of all cells, so ``sum(x) = e`` is false whenever the true sum
exceeds the largest representable value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from txguard.logic import (
    And,
    ArraySort,
    Atom,
    BinOp,
    BitVec,
    BoolConst,
    BoolVar,
    Const,
    Expr,
    Implies,
    Not,
    Or,
    Select,
    Sort,
    Store,
    Sum,
    Var,
    max_value,
    sort_of,
)


@dataclass(frozen=True)
class ArrayValue:
    """Total function given by a default value and finitely many overrides."""

    default: object
    entries: tuple = ()  # sorted (index, value) pairs, value != default
    _map: dict = field(default=None, compare=False, repr=False, hash=False)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "_map", dict(self.entries))

    @staticmethod
    def make(default, mapping: Mapping | None = None) -> "ArrayValue":
        items = tuple(sorted((k, v) for k, v in (mapping or {}).items() if v != default))
        return ArrayValue(default, items)

    def __getitem__(self, k):
        return self._map.get(k, self.default)

    def store(self, k, v) -> "ArrayValue":
        m = dict(self._map)
        m[k] = v
        return ArrayValue.make(self.default, m)


def default_value(sort: Sort):
    if isinstance(sort, BitVec):
        return 0
    return ArrayValue(default_value(sort.elem))


def domain_size(sort: ArraySort) -> int:
    return 1 << sort.index.width  # type: ignore[union-attr]


def true_sum(arr: ArrayValue, sort: ArraySort) -> int:
    n = domain_size(sort)
    explicit = arr._map
    return sum(explicit.values()) + arr.default * (n - len(explicit))


def arith(op: str, a: int, b: int, width: int) -> int:
    m = max_value(width)
    if op == "+":
        return (a + b) & m
    if op == "-":
        return (a - b) & m
    if op == "*":
        return (a * b) & m
    if op == "/":
        return m if b == 0 else a // b
    if op == "%":
        return a if b == 0 else a % b
    raise ValueError(op)


_REL = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


class UnboundVariable(KeyError):
    pass


def eval_term(t, model: Mapping):
    if isinstance(t, Var):
        try:
            return model[t]
        except KeyError:
            raise UnboundVariable(t) from None
    if isinstance(t, Const):
        return t.value
    if isinstance(t, BinOp):
        w = sort_of(t.left).width  # type: ignore[union-attr]
        return arith(t.op, eval_term(t.left, model), eval_term(t.right, model), w)
    if isinstance(t, Select):
        return eval_term(t.array, model)[eval_term(t.index, model)]
    if isinstance(t, Store):
        return eval_term(t.array, model).store(eval_term(t.index, model), eval_term(t.value, model))
    if isinstance(t, Sum):
        return true_sum(eval_term(t.array, model), sort_of(t.array))  # type: ignore[arg-type]
    raise TypeError(f"not a term: {t!r}")


def evaluate(f: Expr, model: Mapping, width: int | None = None) -> bool:
    """Truth value of ``f``; ``model`` maps Var/BoolVar to values.

    ``width`` is accepted for symmetry with the oracle API; every term
    carries its own width.
    """
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, BoolVar):
        return bool(model[f])
    if isinstance(f, Atom):
        a = eval_term(f.left, model)
        b = eval_term(f.right, model)
        return _REL[f.rel](a, b)
    if isinstance(f, Not):
        return not evaluate(f.arg, model)
    if isinstance(f, And):
        return all(evaluate(a, model) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, model) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.premise, model)) or evaluate(f.conclusion, model)
    raise TypeError(f"not a formula: {f!r}")
