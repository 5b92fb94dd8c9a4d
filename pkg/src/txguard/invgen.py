"""Candidate invariants, the refinement relation and the workset."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Mapping

from txguard.basicpath import BasicPath
from txguard.lang.ast import ArrAssign, Assert, Assign, Assume, Contract
from txguard.logic import (
    TRUE,
    ArraySort,
    Atom,
    BitVec,
    Const,
    Formula,
    Sum,
    Var,
    canon_key,
    conj,
    conjuncts,
    constants,
    free_vars,
    pretty,
)

DEFAULT_MAX_WORKSET = 10_000
DEFAULT_MAX_ATOM_SIZE = 10


class EmptyWorkset(LookupError):
    pass


@dataclass(frozen=True)
class CandidateInv:
    psi: Formula = TRUE
    mu_items: tuple[tuple[str, Formula], ...] = ()  # sorted, TRUE entries dropped

    @staticmethod
    def make(psi: Formula, mu: Mapping[str, Formula] | None = None) -> "CandidateInv":
        items = tuple(sorted((l, f) for l, f in (mu or {}).items() if f != TRUE))
        return CandidateInv(psi, items)

    @property
    def mu(self) -> dict[str, Formula]:
        return dict(self.mu_items)

    @property
    def size(self) -> int:
        return len(conjuncts(self.psi)) + sum(len(conjuncts(f)) for _, f in self.mu_items)

    def with_psi(self, psi: Formula) -> "CandidateInv":
        return CandidateInv(psi, self.mu_items)

    def with_loop(self, label: str, f: Formula) -> "CandidateInv":
        mu = self.mu
        mu[label] = f
        return CandidateInv.make(self.psi, mu)

    def conjoin(self, other: "CandidateInv") -> "CandidateInv":
        mu = self.mu
        for l, f in other.mu_items:
            mu[l] = conj(mu.get(l, TRUE), f)
        return CandidateInv.make(conj(self.psi, other.psi), mu)

    def __str__(self) -> str:
        parts = [f"ψ = {pretty(self.psi)}"]
        parts += [f"μ({l}) = {pretty(f)}" for l, f in self.mu_items]
        return "; ".join(parts)


# ---------------------------------------------------------------------------
# Atom pool

def _is_scalar(v: Var) -> bool:
    return isinstance(v.sort, BitVec)


def _is_sum_map(v: Var, uint: BitVec) -> bool:
    s = v.sort
    return isinstance(s, ArraySort) and isinstance(s.index, BitVec) and s.elem == uint


def atom_pool(X: Iterable[Var], C: Iterable[Const], uint_width: int) -> list[Formula]:
    """All atoms over ``X`` and ``C`` in a deterministic order."""
    uint = BitVec(uint_width)
    xs = sorted({v for v in X if v.version == 0}, key=canon_key)
    cs = sorted({c for c in C if c.width == uint_width}, key=lambda c: c.value)
    scalars = [v for v in xs if _is_scalar(v)]
    uints = [v for v in scalars if v.sort == uint]
    out: list[Formula] = []
    for i, x in enumerate(scalars):
        for y in scalars[i + 1:]:
            if x.sort == y.sort:
                out.append(Atom("=", x, y))
    for x in uints:
        for y in uints:
            if x != y:
                out.append(Atom(">=", x, y))
    for x in uints:
        for n in cs:
            out.append(Atom("=", x, n))
            out.append(Atom(">=", x, n))
            out.append(Atom("<=", x, n))
    for m in xs:
        if _is_sum_map(m, uint):
            for e in [*cs, *uints]:
                out.append(Atom("=", Sum(m), e))
    return out


def refine(phi: Formula, X: Iterable[Var], C: Iterable[Const], uint_width: int) -> list[Formula]:
    """``{phi and a | a in A(X, C)}`` minus atoms already present in ``phi``."""
    present = set(conjuncts(phi))
    return [conj(phi, a) for a in atom_pool(X, C, uint_width) if a not in present]


def stmt_constants(stmts) -> set[Const]:
    out: set[Const] = set()
    for a in stmts:
        for e in _stmt_exprs(a):
            out |= constants(e)
    return out


def stmt_vars(stmts) -> set[Var]:
    out: set[Var] = set()
    for a in stmts:
        for e in _stmt_exprs(a):
            out |= {v for v in free_vars(e) if isinstance(v, Var)}
    return out


def _stmt_exprs(a):
    if isinstance(a, Assign):
        return (a.target, a.value)
    if isinstance(a, ArrAssign):
        return (a.target, *a.indices, a.value)
    if isinstance(a, (Assume, Assert)):
        return (a.cond,)
    return ()


@dataclass
class RefineContext:
    """Contract facts the refinement functions need."""

    globals: tuple[Var, ...]
    ctor_constants: frozenset[Const]
    width: int

    @staticmethod
    def of(c: Contract) -> "RefineContext":
        from txguard.lang.ast import iter_stmts

        ctor = stmt_constants(s for s in iter_stmts(c.constructor.body))
        return RefineContext(c.global_vars, frozenset(ctor), c.width)

    def basic_constants(self) -> set[Const]:
        return {Const(0, self.width), Const(1, self.width)}


def refine_t(psi: Formula, path: BasicPath, ctx: RefineContext) -> list[Formula]:
    C = ctx.ctor_constants | stmt_constants(path.stmts) | ctx.basic_constants()
    return refine(psi, ctx.globals, C, ctx.width)


def refine_l(mu_l: Formula, path: BasicPath, ctx: RefineContext) -> list[Formula]:
    C = stmt_constants(path.stmts) | ctx.basic_constants()
    return refine(mu_l, stmt_vars(path.stmts), C, ctx.width)


# Spec-style aliases.
refineT = refine_t
refineL = refine_l


def generate(
    U: Iterable[BasicPath],
    cand: CandidateInv,
    ctx: RefineContext,
    seen: set[CandidateInv] | None = None,
    max_atoms: int = DEFAULT_MAX_ATOM_SIZE,
) -> list[CandidateInv]:
    """New candidates from the unproven paths; ``seen`` is updated in place."""
    seen = set() if seen is None else seen
    out: list[CandidateInv] = []

    def offer(c: CandidateInv) -> None:
        if c in seen or c.size > max_atoms:
            return
        seen.add(c)
        out.append(c)

    mu = cand.mu
    for p in U:
        if p.touches_function and p.role != "internal":
            for phi in refine_t(cand.psi, p, ctx):
                offer(cand.with_psi(phi))
        for label in p.loop_labels():
            for phi in refine_l(mu.get(label, TRUE), p, ctx):
                offer(cand.with_loop(label, phi))
    return out


@dataclass(order=True)
class _Entry:
    size: int
    seq: int
    cand: CandidateInv = field(compare=False)


class Workset:
    """Smallest-first, FIFO among equals; bounded."""

    def __init__(self, cap: int = DEFAULT_MAX_WORKSET):
        self.cap = cap
        self._heap: list[_Entry] = []
        self._members: dict[CandidateInv, int] = {}
        self._seq = count()

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def __contains__(self, c: CandidateInv) -> bool:
        return c in self._members

    def add(self, c: CandidateInv) -> bool:
        if c in self._members or len(self._heap) >= self.cap:
            return False
        e = _Entry(c.size, next(self._seq), c)
        self._members[c] = e.seq
        heapq.heappush(self._heap, e)
        return True

    def extend(self, cs: Iterable[CandidateInv]) -> int:
        return sum(self.add(c) for c in cs)

    def choose(self) -> CandidateInv:
        if not self._heap:
            raise EmptyWorkset("workset is empty")
        e = heapq.heappop(self._heap)
        del self._members[e.cand]
        return e.cand

    def candidates(self) -> list[CandidateInv]:
        return [e.cand for e in sorted(self._heap)]

    def strengthen(self, inv: CandidateInv) -> None:
        """Conjoin ``inv`` into every remaining candidate."""
        entries = sorted(self._heap)
        self._heap = []
        self._members = {}
        for e in entries:
            c = e.cand.conjoin(inv)
            if c in self._members:
                continue
            ne = _Entry(c.size, e.seq, c)
            self._members[c] = e.seq
            self._heap.append(ne)
        heapq.heapify(self._heap)


def choose(W: Workset) -> CandidateInv:
    return W.choose()


def strengthen_workset(W: Workset, psi: Formula, mu: Mapping[str, Formula]) -> Workset:
    W.strengthen(CandidateInv.make(psi, mu))
    return W
