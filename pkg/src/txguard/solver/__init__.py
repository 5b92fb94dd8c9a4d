"""Validity checking of verification conditions.

Pipeline for one VC ``p -> q``:

1. syntactic simplification of premise and conclusion;
2. validity templates (before any preprocessing, as they look at ``sum``);
3. the free-variable invalidity check;
4. elimination of ``sum``;
5. for nonlinear VCs, a concrete counterexample probe;
6. the external SMT solver on ``not vc``; linear VCs are sent as exact
   integer arithmetic, the rest as bitvectors.

Verdicts are memoised per formula.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from txguard.logic import FALSE, TRUE, Expr, Implies
from txguard.solver.fastpath import pipeline_invalid, quick_invalid
from txguard.solver.probe import find_counterexample, nonlinear
from txguard.solver.simplify import simplify
from txguard.solver.smtlib import (
    DEFAULT_SOLVER_CMD,
    MalformedModel,
    SolverProcess,
    SolverUnavailable,
    lia_script,
    validity_script,
)
from txguard.solver.sumelim import UnsupportedSumShape, eliminate_sum
from txguard.solver.templates import TEMPLATES, Template, match_template


@dataclass(frozen=True)
class Verdict:
    kind: str  # valid | invalid | unknown
    reason: str = ""

    @property
    def is_valid(self) -> bool:
        return self.kind == "valid"

    def __str__(self) -> str:
        return f"{self.kind}({self.reason})" if self.reason else self.kind


VALID = Verdict("valid")
INVALID = Verdict("invalid")


def Unknown(reason: str) -> Verdict:  # noqa: N802 - reads like a constructor
    return Verdict("unknown", reason)


@dataclass
class SolverStats:
    queries: int = 0
    cache_hits: int = 0
    trivial: int = 0
    template_hits: int = 0
    quick_invalid_hits: int = 0
    probe_hits: int = 0
    smt_calls: int = 0
    lia_encoded: int = 0
    timeouts: int = 0
    errors: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class Solver:
    cmd: str = DEFAULT_SOLVER_CMD
    timeout: float = 10.0
    use_probe: bool = True
    stats: SolverStats = field(default_factory=SolverStats)
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _count(self, name: str) -> None:
        with self._lock:
            setattr(self.stats, name, getattr(self.stats, name) + 1)

    def check_validity(self, vc: Expr, timeout: float | None = None) -> Verdict:
        self._count("queries")
        with self._lock:
            hit = self._cache.get(vc)
        if hit is not None:
            self._count("cache_hits")
            return hit
        verdict = self._check(vc, self.timeout if timeout is None else timeout)
        with self._lock:
            self._cache[vc] = verdict
        return verdict

    def _check(self, vc: Expr, timeout: float) -> Verdict:
        if isinstance(vc, Implies):
            p, q = simplify(vc.premise), simplify(vc.conclusion)
            if p == FALSE or q == TRUE:
                self._count("trivial")
                return Verdict("valid", "trivial")
            f: Expr = Implies(p, q)
        else:
            f = simplify(vc)
            if f == TRUE:
                self._count("trivial")
                return Verdict("valid", "trivial")
            if f == FALSE:
                self._count("trivial")
                return Verdict("invalid", "trivial")
        t = match_template(f)
        if t is not None:
            self._count("template_hits")
            return Verdict("valid", f"template:{t.name}")
        if pipeline_invalid(f):
            self._count("quick_invalid_hits")
            return Verdict("invalid", "free-variables")
        try:
            g = eliminate_sum(f)
        except UnsupportedSumShape as exc:
            self._count("errors")
            return Unknown(f"unsupported-sum: {exc}")
        if self.use_probe and nonlinear(g):
            if find_counterexample(g) is not None:
                self._count("probe_hits")
                return Verdict("invalid", "counterexample")
        return self._smt(g, timeout)

    def _smt(self, g: Expr, timeout: float) -> Verdict:
        script = lia_script(g)
        if script is None:
            script = validity_script(g)
        else:
            self._count("lia_encoded")
        self._count("smt_calls")
        try:
            answer = SolverProcess(self.cmd).check_sat(script, timeout)
        except MalformedModel:
            self._count("errors")
            return Unknown("solver-error")
        if answer == "unsat":
            return Verdict("valid", "smt")
        if answer == "sat":
            return Verdict("invalid", "smt")
        if answer == "timeout":
            self._count("timeouts")
            return Unknown("timeout")
        return Unknown("solver-error")


_default = Solver()


def default_solver() -> Solver:
    return _default


def check_validity(vc: Expr, timeout: float = 10.0, solver: Solver | None = None) -> Verdict:
    return (solver or _default).check_validity(vc, timeout)


__all__ = [
    "INVALID",
    "MalformedModel",
    "Solver",
    "SolverStats",
    "SolverUnavailable",
    "TEMPLATES",
    "Template",
    "Unknown",
    "UnsupportedSumShape",
    "VALID",
    "Verdict",
    "check_validity",
    "eliminate_sum",
    "match_template",
    "quick_invalid",
    "simplify",
]
