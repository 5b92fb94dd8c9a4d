"""Concrete counterexample search for VCs that are hard for bit-blasting.

Wide multiplications make satisfiable queries very slow for SMT solvers.
Before paying a full timeout, a handful of boundary-value assignments are
tried; variables defined by an equation in the premise (as produced by the
strongest postcondition) are computed rather than guessed. Finding an
assignment that falsifies the VC proves it invalid; failing to find one
proves nothing.
"""

from __future__ import annotations

import random

from txguard.logic import (
    ArraySort,
    Atom,
    BinOp,
    BitVec,
    BoolVar,
    Const,
    Expr,
    Implies,
    Var,
    conjuncts,
    free_vars,
    max_value,
    walk,
)
from txguard.semantics import ArrayValue, UnboundVariable, eval_term, evaluate


def nonlinear(f: Expr) -> bool:
    for n in walk(f):
        if isinstance(n, BinOp) and n.op in ("*", "/", "%"):
            if not isinstance(n.left, Const) and not isinstance(n.right, Const):
                return True
    return False


def _boundary(width: int) -> list[int]:
    m = max_value(width)
    half = 1 << (width - 1)
    vals = {0, 1, 2, 3, m, m - 1, half, half - 1, half + 1, 1 << (width // 2)}
    return sorted(v for v in vals if 0 <= v <= m)


def _definitions(premise) -> list[tuple[Var, object]]:
    """``v = t`` conjuncts usable to compute ``v``, in dependency order."""
    cands: dict[Var, object] = {}
    for c in premise:
        if isinstance(c, Atom) and c.rel == "=":
            for v, t in ((c.left, c.right), (c.right, c.left)):
                if isinstance(v, Var) and v not in cands and v not in free_vars(t):
                    cands[v] = t
                    break
    order: list[tuple[Var, object]] = []
    done: set[Var] = set()
    visiting: set[Var] = set()

    def visit(v: Var) -> bool:
        if v in done:
            return True
        if v in visiting:
            return False
        visiting.add(v)
        for u in free_vars(cands[v]):
            if u in cands and not visit(u):
                return False
        visiting.discard(v)
        done.add(v)
        order.append((v, cands[v]))
        return True

    for v in list(cands):
        if not visit(v):
            cands.pop(v, None)
    return [(v, t) for v, t in order if v in cands]


def find_counterexample(vc: Expr, samples: int = 200, seed: int = 0) -> dict | None:
    """An assignment making ``vc`` false, or None."""
    if any(isinstance(n, BoolVar) and n.name.startswith("$S") for n in walk(vc)):
        return None  # abstracted sum atoms: models would not transfer
    premise = conjuncts(vc.premise) if isinstance(vc, Implies) else ()
    defs = _definitions(premise)
    defined = {v for v, _ in defs}
    free = sorted(
        (v for v in free_vars(vc) if v not in defined),
        key=lambda v: (type(v).__name__, getattr(v, "name", ""), getattr(v, "version", 0)),
    )
    rng = random.Random(seed)
    pools: dict[int, list[int]] = {}

    def pool(width: int) -> list[int]:
        if width not in pools:
            pools[width] = _boundary(width)
        return pools[width]

    def sample(sort, model) -> object:
        if isinstance(sort, BitVec):
            if rng.random() < 0.85:
                return rng.choice(pool(sort.width))
            return rng.getrandbits(sort.width)
        assert isinstance(sort, ArraySort)
        default = sample(sort.elem, model)
        overrides = {}
        if rng.random() < 0.5:
            idx_pool = [val for var, val in model.items() if isinstance(var, Var) and var.sort == sort.index]
            for k in idx_pool[:3]:
                if rng.random() < 0.5:
                    overrides[k] = sample(sort.elem, model)
        return ArrayValue.make(default, overrides)

    for _ in range(samples):
        model: dict = {}
        # Scalars first so array overrides can reuse index values.
        for v in sorted(free, key=lambda v: isinstance(getattr(v, "sort", None), ArraySort)):
            model[v] = rng.random() < 0.5 if isinstance(v, BoolVar) else sample(v.sort, model)
        try:
            for v, t in defs:
                model[v] = eval_term(t, model)
            if not evaluate(vc, model):
                return model
        except UnboundVariable:
            return None
    return None
