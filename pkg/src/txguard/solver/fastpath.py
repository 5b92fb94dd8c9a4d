"""Syntactic invalidity check on implications.

A VC ``p -> q`` whose conclusion mentions a variable the premise never
constrains is declared invalid without consulting a solver. Only the
free-variable condition is checked; satisfiability of ``p`` and
non-triviality of ``q`` are not, so a valid VC can be misreported as
invalid, never the other way round.
"""

from __future__ import annotations

from txguard.logic import Expr, Implies, Var, free_vars


def quick_invalid(vc: Expr) -> bool:
    if not isinstance(vc, Implies):
        return False
    return not free_vars(vc.premise) >= free_vars(vc.conclusion)


def _index_only_vars(q: Expr) -> frozenset:
    """Variables of ``q`` that occur only inside array index positions."""
    from txguard.logic import Select, Store, children

    inside: set = set()
    outside: set = set()

    def go(e: Expr, in_index: bool) -> None:
        if isinstance(e, Var):
            (inside if in_index else outside).add(e)
            return
        if isinstance(e, (Select, Store)):
            go(e.array, in_index)
            go(e.index, True)
            if isinstance(e, Store):
                go(e.value, in_index)
            return
        for k in children(e):
            go(k, in_index)

    go(q, False)
    return frozenset(inside - outside)


def pipeline_invalid(vc: Expr) -> bool:
    """The fast path as used by the solver pipeline.

    Same as :func:`quick_invalid`, except that it abstains when every
    variable missing from the premise only selects a map cell. Such a cell
    is often bounded by a premise fact about the whole map (a ``sum`` or a
    neighbouring cell), so the free-variable argument does not apply.
    Abstaining is always sound; the VC is then sent to the solver.
    """
    if not quick_invalid(vc):
        return False
    assert isinstance(vc, Implies)
    missing = free_vars(vc.conclusion) - free_vars(vc.premise)
    return not missing <= _index_only_vars(vc.conclusion)
