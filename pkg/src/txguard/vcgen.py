"""Strongest postconditions, verification conditions and the validator."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from txguard.basicpath import AtomicStmt, BasicPath, PathShape, annotate, skeleton
from txguard.lang.ast import ArrAssign, Assert, Assign, Assume, Contract, Havoc, QueryMeta
from txguard.lang.inline import havoc_summary
from txguard.logic import (
    TRUE,
    Atom,
    Formula,
    Implies,
    Select,
    Store,
    Term,
    Var,
    conj,
    rename,
)
from txguard.solver import Solver, Verdict, default_solver


@dataclass
class SPState:
    """``(phi1, phi2)`` plus the per-path version counters.

    ``phi2`` is kept as the list of safety clauses it conjoins, each tagged
    with its query.
    """

    phi1: Formula = TRUE
    clauses: list[tuple[QueryMeta | None, Formula]] = field(default_factory=list)
    versions: dict[str, int] = field(default_factory=lambda: defaultdict(int))

    @property
    def phi2(self) -> Formula:
        return conj(c for _, c in self.clauses)

    def fresh(self, x: Var) -> Var:
        self.versions[x.name] += 1
        return x.primed(self.versions[x.name])


def _nested_store(base: Term, indices: Sequence[Term], value: Term) -> Term:
    if len(indices) == 1:
        return Store(base, indices[0], value)
    inner = _nested_store(Select(base, indices[0]), indices[1:], value)
    return Store(base, indices[0], inner)


def sp(a: AtomicStmt, state: SPState) -> SPState:
    """Apply one atomic statement, in place; returns the state."""
    if isinstance(a, Assign):
        x = a.target
        old = state.fresh(x)
        m = {x: old}
        state.phi1 = conj(Atom("=", x, rename(a.value, m)), rename(state.phi1, m))
    elif isinstance(a, ArrAssign):
        x = a.target
        old = state.fresh(x)
        m = {x: old}
        idx = [rename(i, m) for i in a.indices]
        rhs = _nested_store(old, idx, rename(a.value, m))
        state.phi1 = conj(Atom("=", x, rhs), rename(state.phi1, m))
    elif isinstance(a, Assume):
        state.phi1 = conj(state.phi1, a.cond)
    elif isinstance(a, Assert):
        state.clauses.append((a.meta, Implies(state.phi1, a.cond)))
    elif isinstance(a, Havoc):
        state.phi1 = havoc_summary(state.phi1, a.names)
    else:
        raise TypeError(f"not an atomic statement: {a!r}")
    return state


def sp_seq(stmts: Sequence[AtomicStmt], phi1: Formula) -> SPState:
    st = SPState(phi1)
    for a in stmts:
        sp(a, st)
    return st


@dataclass(frozen=True)
class VC:
    inductiveness: Formula
    safety: tuple[tuple[QueryMeta | None, Formula], ...]


def gen_vc(p: BasicPath) -> VC:
    st = sp_seq(p.stmts, p.pre)
    return VC(Implies(st.phi1, p.post), tuple(st.clauses))


@dataclass(frozen=True)
class ValidationResult:
    inductive: bool
    unproven: tuple[BasicPath, ...]
    failed_queries: frozenset[QueryMeta] = frozenset()
    proven_queries: frozenset[QueryMeta] = frozenset()
    verdicts: tuple[tuple[str, Verdict], ...] = ()

    @property
    def failedQueries(self) -> frozenset[QueryMeta]:  # noqa: N802 - spec name
        return self.failed_queries


class Validator:
    """Checks candidates against a fixed contract; paths are built once."""

    def __init__(self, c: Contract, solver: Solver | None = None, workers: int = 1):
        self.contract = c
        self.shapes: list[PathShape] = skeleton(c)
        self.solver = solver or default_solver()
        self.workers = max(1, workers)

    def paths(self, psi: Formula, mu: Mapping[str, Formula]) -> list[BasicPath]:
        return annotate(self.shapes, psi, mu)

    def _check_all(self, formulas: list[Formula]) -> list[Verdict]:
        if self.workers == 1 or len(formulas) < 2:
            return [self.solver.check_validity(f) for f in formulas]
        with ThreadPoolExecutor(self.workers) as pool:
            return list(pool.map(self.solver.check_validity, formulas))

    def validate(self, psi: Formula, mu: Mapping[str, Formula]) -> ValidationResult:
        paths = self.paths(psi, mu)
        vcs = [gen_vc(p) for p in paths]
        ind = self._check_all([vc.inductiveness for vc in vcs])
        bad = tuple(p for p, v in zip(paths, ind) if not v.is_valid)
        if bad:
            return ValidationResult(False, bad)
        flat = [(i, meta, f) for i, vc in enumerate(vcs) for meta, f in vc.safety]
        verdicts = self._check_all([f for _, _, f in flat])
        failed_paths: set[int] = set()
        failed: set[QueryMeta] = set()
        seen: set[QueryMeta] = set()
        for (i, meta, _), v in zip(flat, verdicts):
            if meta is not None:
                seen.add(meta)
            if not v.is_valid:
                failed_paths.add(i)
                if meta is not None:
                    failed.add(meta)
        unproven = tuple(p for i, p in enumerate(paths) if i in failed_paths)
        return ValidationResult(
            True, unproven, frozenset(failed), frozenset(seen - failed)
        )


def validate(
    c: Contract,
    psi: Formula,
    mu: Mapping[str, Formula],
    solver: Solver | None = None,
    workers: int = 1,
) -> ValidationResult:
    return Validator(c, solver, workers).validate(psi, mu)
