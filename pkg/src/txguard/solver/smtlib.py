"""SMT-LIB v2 emission and the external solver process."""

from __future__ import annotations

import shlex
import shutil
import subprocess
from dataclasses import dataclass

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
    walk,
)

LOGIC = "QF_ABV"
DEFAULT_SOLVER_CMD = "z3 -in -smt2"


class SolverUnavailable(RuntimeError):
    """The external solver could not be started."""


class MalformedModel(RuntimeError):
    """The solver replied with something other than sat/unsat/unknown."""


def symbol(v: Var | BoolVar) -> str:
    name = v.name + ("'" * v.version if isinstance(v, Var) else "")
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def sort_text(s: Sort) -> str:
    if isinstance(s, BitVec):
        return f"(_ BitVec {s.width})"
    assert isinstance(s, ArraySort)
    return f"(Array {sort_text(s.index)} {sort_text(s.elem)})"


_BVOP = {"+": "bvadd", "-": "bvsub", "*": "bvmul", "/": "bvudiv", "%": "bvurem"}
_REL = {"<=": "bvule", "<": "bvult", ">=": "bvuge", ">": "bvugt"}


def term_text(t) -> str:
    if isinstance(t, Var):
        return symbol(t)
    if isinstance(t, Const):
        return f"(_ bv{t.value} {t.width})"
    if isinstance(t, BinOp):
        return f"({_BVOP[t.op]} {term_text(t.left)} {term_text(t.right)})"
    if isinstance(t, Select):
        return f"(select {term_text(t.array)} {term_text(t.index)})"
    if isinstance(t, Store):
        return f"(store {term_text(t.array)} {term_text(t.index)} {term_text(t.value)})"
    if isinstance(t, Sum):
        raise ValueError("sum must be eliminated before SMT emission")
    raise TypeError(f"not a term: {t!r}")


def _mul_exact(a: Atom):
    """Match ``(a*b)/a = b`` (either side) and return ``(a, b)``."""
    for lhs, rhs in ((a.left, a.right), (a.right, a.left)):
        if (
            isinstance(lhs, BinOp)
            and lhs.op == "/"
            and isinstance(lhs.left, BinOp)
            and lhs.left.op == "*"
            and lhs.left.left == lhs.right
            and lhs.left.right == rhs
        ):
            return lhs.right, rhs
    return None


def formula_text(f: Expr) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, BoolVar):
        return symbol(f)
    if isinstance(f, Atom):
        if f.rel == "=":
            hit = _mul_exact(f)
            if hit is not None:
                # (a*b)/a = b  iff  a = 0 ? b = max : a*b does not overflow.
                a, b = hit
                w = sort_of(a).width  # type: ignore[union-attr]
                at, bt = term_text(a), term_text(b)
                return (
                    f"(ite (= {at} (_ bv0 {w})) (= {bt} (_ bv{max_value(w)} {w}))"
                    f" (not (bvumulo {at} {bt})))"
                )
            return f"(= {term_text(f.left)} {term_text(f.right)})"
        if f.rel == "!=":
            return f"(distinct {term_text(f.left)} {term_text(f.right)})"
        return f"({_REL[f.rel]} {term_text(f.left)} {term_text(f.right)})"
    if isinstance(f, Not):
        return f"(not {formula_text(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(formula_text(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula_text(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(=> {formula_text(f.premise)} {formula_text(f.conclusion)})"
    raise TypeError(f"not a formula: {f!r}")


def declarations(f: Expr) -> list[str]:
    seen: dict[str, str] = {}
    for n in walk(f):
        if isinstance(n, Var):
            seen.setdefault(symbol(n), f"(declare-const {symbol(n)} {sort_text(n.sort)})")
        elif isinstance(n, BoolVar):
            seen.setdefault(symbol(n), f"(declare-const {symbol(n)} Bool)")
    return [seen[k] for k in sorted(seen)]


def validity_script(vc: Expr) -> str:
    """Script whose answer is ``unsat`` exactly when ``vc`` is valid."""
    lines = [f"(set-logic {LOGIC})", *declarations(vc), f"(assert (not {formula_text(vc)}))", "(check-sat)", "(exit)"]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolverProcess:
    """One child process per query, killed when the wall-clock budget runs out."""

    cmd: str = DEFAULT_SOLVER_CMD

    def argv(self) -> list[str]:
        argv = shlex.split(self.cmd)
        if not argv or shutil.which(argv[0]) is None:
            raise SolverUnavailable(f"solver command not found: {self.cmd!r}")
        return argv

    def check_sat(self, script: str, timeout: float) -> str:
        """Return ``sat``, ``unsat``, ``unknown`` or ``timeout``."""
        argv = self.argv()
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise SolverUnavailable(str(exc)) from exc
        try:
            out, _ = proc.communicate(script, timeout=max(timeout, 1e-9))
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return "timeout"
        answer = out.strip().splitlines()[0].strip() if out.strip() else ""
        if answer in ("sat", "unsat", "unknown"):
            return answer
        raise MalformedModel(f"unexpected solver reply: {out.strip()[:200]!r}")


# ---------------------------------------------------------------------------
# Exact integer encoding of linear VCs
#
# A w-bit value is an integer in [0, 2^w); wrapping operations become
# ``mod 2^w``. Maps become integer arrays whose read cells are range
# constrained. Models transfer both ways (project out-of-range cells to 0,
# or extend with 0), provided map equalities only occur as premise
# conjuncts, which holds for VCs built by sp. Bit-blasting 256-bit adders
# is slow; linear integer reasoning over the same constraints is not.

LIA_LOGIC = "QF_AUFLIA"


class NotLinear(ValueError):
    pass


def _int_sort(s: Sort) -> str:
    if isinstance(s, BitVec):
        return "Int"
    return f"(Array {_int_sort(s.index)} {_int_sort(s.elem)})"


class _LiaEmitter:
    def __init__(self):
        self.ranged: dict[str, int] = {}  # term text -> width

    def term(self, t) -> str:
        if isinstance(t, Var):
            s = symbol(t)
            if isinstance(t.sort, BitVec):
                self.ranged[s] = t.sort.width
            return s
        if isinstance(t, Const):
            return str(t.value)
        if isinstance(t, Select):
            s = f"(select {self.term(t.array)} {self.term(t.index)})"
            srt = sort_of(t)
            if isinstance(srt, BitVec):
                self.ranged[s] = srt.width
            return s
        if isinstance(t, Store):
            return f"(store {self.term(t.array)} {self.term(t.index)} {self.term(t.value)})"
        if isinstance(t, BinOp):
            w = sort_of(t).width  # type: ignore[union-attr]
            m = 1 << w
            a, b = self.term(t.left), self.term(t.right)
            if t.op == "+":
                return f"(mod (+ {a} {b}) {m})"
            if t.op == "-":
                return f"(mod (- {a} {b}) {m})"
            if t.op == "*":
                if isinstance(t.right, Const):
                    return f"(mod (* {b} {a}) {m})"
                if isinstance(t.left, Const):
                    return f"(mod (* {a} {b}) {m})"
                raise NotLinear("variable product")
            if not isinstance(t.right, Const):
                raise NotLinear(f"variable divisor in {t.op}")
            n = t.right.value
            if t.op == "/":
                return str(m - 1) if n == 0 else f"(div {a} {n})"
            return a if n == 0 else f"(mod {a} {n})"
        if isinstance(t, Sum):
            raise ValueError("sum must be eliminated before SMT emission")
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f: Expr, top_premise: bool = False) -> str:
        if isinstance(f, BoolConst):
            return "true" if f.value else "false"
        if isinstance(f, BoolVar):
            return symbol(f)
        if isinstance(f, Atom):
            if isinstance(sort_of(f.left), ArraySort) and not top_premise:
                raise NotLinear("map equality outside the premise")
            a, b = self.term(f.left), self.term(f.right)
            op = {"=": "=", "<=": "<=", "<": "<", ">=": ">=", ">": ">"}.get(f.rel)
            if f.rel == "!=":
                return f"(not (= {a} {b}))"
            return f"({op} {a} {b})"
        if isinstance(f, Not):
            return f"(not {self.formula(f.arg)})"
        if isinstance(f, And):
            return "(and " + " ".join(self.formula(a, top_premise) for a in f.args) + ")"
        if isinstance(f, Or):
            return "(or " + " ".join(self.formula(a) for a in f.args) + ")"
        if isinstance(f, Implies):
            return f"(=> {self.formula(f.premise)} {self.formula(f.conclusion)})"
        raise TypeError(f"not a formula: {f!r}")

    def validity(self, vc: Expr) -> str:
        if isinstance(vc, Implies):
            return f"(=> {self.formula(vc.premise, True)} {self.formula(vc.conclusion)})"
        return self.formula(vc)


def lia_script(vc: Expr) -> str | None:
    """Integer-arithmetic validity script, or None if ``vc`` is nonlinear."""
    em = _LiaEmitter()
    try:
        body = em.validity(vc)
    except NotLinear:
        return None
    decls: dict[str, str] = {}
    for n in walk(vc):
        if isinstance(n, Var):
            decls.setdefault(symbol(n), f"(declare-const {symbol(n)} {_int_sort(n.sort)})")
        elif isinstance(n, BoolVar):
            decls.setdefault(symbol(n), f"(declare-const {symbol(n)} Bool)")
    ranges = [f"(and (<= 0 {t}) (< {t} {1 << w}))" for t, w in sorted(em.ranged.items())]
    lines = [f"(set-logic {LIA_LOGIC})", *(decls[k] for k in sorted(decls))]
    lines += [f"(assert {r})" for r in ranges]
    lines += [f"(assert (not {body}))", "(check-sat)", "(exit)"]
    return "\n".join(lines) + "\n"
