"""Basic paths: branch-free statement sequences between cut-points.

Cut-points are function entries, function exits and loop heads. The path
skeleton of a contract does not depend on the candidate invariant, so it is
computed once (:func:`skeleton`) and re-annotated for every candidate
(:func:`annotate`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from txguard.lang.ast import (
    ArrAssign,
    Assert,
    Assign,
    Assume,
    Call,
    Contract,
    Function,
    Havoc,
    If,
    Seq,
    Stmt,
    While,
)
from txguard.logic import TRUE, Formula, neg, pretty

AtomicStmt = Assign | ArrAssign | Assume | Assert | Havoc


@dataclass(frozen=True, order=True)
class Label:
    kind: str  # entry | exit | loop
    name: str  # function name, or loop label

    def __str__(self) -> str:
        if self.kind == "loop":
            return self.name
        fn = "0" if self.name == "constructor" else self.name
        return f"{self.kind}_{fn}"


def FuncEntry(f: str) -> Label:  # noqa: N802
    return Label("entry", f)


def FuncExit(f: str) -> Label:  # noqa: N802
    return Label("exit", f)


def Loop(l: str) -> Label:  # noqa: N802, E741
    return Label("loop", l)


@dataclass(frozen=True)
class PathShape:
    """A basic path without annotations."""

    start: Label
    stmts: tuple[AtomicStmt, ...]
    end: Label
    function: str
    role: str  # constructor | public | internal


@dataclass(frozen=True)
class BasicPath:
    start_label: Label
    pre: Formula
    stmts: tuple[AtomicStmt, ...]
    end_label: Label
    post: Formula
    function: str = ""
    role: str = "public"

    @property
    def start(self) -> tuple[Label, Formula]:
        return (self.start_label, self.pre)

    @property
    def end(self) -> tuple[Label, Formula]:
        return (self.end_label, self.post)

    @property
    def shape(self) -> PathShape:
        return PathShape(self.start_label, self.stmts, self.end_label, self.function, self.role)

    @property
    def touches_function(self) -> bool:
        return self.start_label.kind == "entry" or self.end_label.kind == "exit"

    def loop_labels(self) -> list[str]:
        return [lab.name for lab in (self.start_label, self.end_label) if lab.kind == "loop"]

    def __str__(self) -> str:
        return dump_path(self)


def _role(f: Function) -> str:
    if f.is_constructor:
        return "constructor"
    return "public" if f.is_public else "internal"


def _function_shapes(f: Function) -> list[PathShape]:
    role = _role(f)
    out: list[PathShape] = []
    Partial = tuple[Label, tuple]

    def go(s: Stmt, partials: list[Partial]) -> list[Partial]:
        if not partials:
            return []
        if isinstance(s, Seq):
            for c in s.stmts:
                partials = go(c, partials)
            return partials
        if isinstance(s, If):
            yes = go(s.then, [(l, st + (Assume(s.cond, s.loc),)) for l, st in partials])
            no = go(s.orelse, [(l, st + (Assume(neg(s.cond), s.loc),)) for l, st in partials])
            return yes + no
        if isinstance(s, While):
            head = Loop(s.label)
            for l, st in partials:
                out.append(PathShape(l, st, head, f.name, role))
            for l, st in go(s.body, [(head, (Assume(s.cond, s.loc),))]):
                out.append(PathShape(l, st, head, f.name, role))
            return [(head, (Assume(neg(s.cond), s.loc),))]
        if isinstance(s, Call):
            raise ValueError("basic paths require a call-free contract; run inline_calls first")
        return [(l, st + (s,)) for l, st in partials]

    for l, st in go(f.body, [(FuncEntry(f.name), ())]):
        out.append(PathShape(l, st, FuncExit(f.name), f.name, role))
    return out


def skeleton(c: Contract) -> list[PathShape]:
    """All path shapes: constructor first, then functions by name."""
    fns = [c.constructor] + sorted(c.functions, key=lambda f: f.name)
    return [p for f in fns for p in _function_shapes(f)]


def annotation(label: Label, role: str, psi: Formula, mu: Mapping[str, Formula]) -> Formula:
    if label.kind == "loop":
        return mu.get(label.name, TRUE)
    if role == "internal":
        return TRUE
    if role == "constructor" and label.kind == "entry":
        return TRUE
    return psi


def annotate(shapes: list[PathShape], psi: Formula, mu: Mapping[str, Formula]) -> list[BasicPath]:
    return [
        BasicPath(
            s.start,
            annotation(s.start, s.role, psi, mu),
            s.stmts,
            s.end,
            annotation(s.end, s.role, psi, mu),
            s.function,
            s.role,
        )
        for s in shapes
    ]


def build_paths(c: Contract, psi: Formula, mu: Mapping[str, Formula]) -> list[BasicPath]:
    return annotate(skeleton(c), psi, mu)


# ---------------------------------------------------------------------------
# Debug output

def dump_stmt(a: AtomicStmt) -> str:
    if isinstance(a, Assign):
        return f"{pretty(a.target)}:={pretty(a.value)}"
    if isinstance(a, ArrAssign):
        idx = "".join(f"[{pretty(i)}]" for i in a.indices)
        return f"{pretty(a.target)}{idx}:={pretty(a.value)}"
    if isinstance(a, Assume):
        return f"assume({pretty(a.cond)})"
    if isinstance(a, Assert):
        return f"assert({pretty(a.cond)})"
    if isinstance(a, Havoc):
        return f"havoc({', '.join(a.names)})"
    raise TypeError(a)


def dump_path(p: BasicPath, name: str = "") -> str:
    body = "; ".join(dump_stmt(a) for a in p.stmts) or "ε"
    head = f"{name}: " if name else ""
    return (
        f"{head}(({p.start_label}, {pretty(p.pre)}), {body}, "
        f"({p.end_label}, {pretty(p.post)}))"
    )


def dump_paths(paths: list[BasicPath]) -> str:
    return "\n".join(dump_path(p, f"p{i}") for i, p in enumerate(paths, 1))
