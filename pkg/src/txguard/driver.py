"""The validator/generator feedback loop and report emission."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from txguard.basicpath import build_paths, dump_paths
from txguard.invgen import (
    DEFAULT_MAX_ATOM_SIZE,
    DEFAULT_MAX_WORKSET,
    CandidateInv,
    RefineContext,
    Workset,
    generate,
)
from txguard.lang import Contract, QueryMeta, parse, queries
from txguard.lang.inline import inline_calls
from txguard.lang.instrument import instrument
from txguard.logic import TRUE, pretty
from txguard.solver import Solver
from txguard.solver.smtlib import DEFAULT_SOLVER_CMD
from txguard.vcgen import Validator

CHECKERS = ("arith", "access")
EXIT_OK, EXIT_ALARMS, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    input_path: str | None = None
    width: int = 256
    inline_depth: int = 2
    global_budget: float = 60.0
    solver_timeout: float = 10.0
    checkers: tuple[str, ...] = ("arith",)
    report_format: str = "text"
    solver_cmd: str = DEFAULT_SOLVER_CMD
    max_workset: int = DEFAULT_MAX_WORKSET
    max_atom_size: int = DEFAULT_MAX_ATOM_SIZE
    workers: int = 1

    def __post_init__(self) -> None:
        self.checkers = tuple(self.checkers)
        if self.global_budget <= 0 or self.solver_timeout <= 0:
            raise ValueError("budgets must be positive")
        if not self.checkers or not set(self.checkers) <= set(CHECKERS):
            raise ValueError(f"checkers must be a nonempty subset of {CHECKERS}")
        if self.report_format not in ("text", "json"):
            raise ValueError("report format must be text or json")
        if self.width < 2 or self.inline_depth < 0:
            raise ValueError("width must be >= 2 and inline depth >= 0")


@dataclass(frozen=True)
class QueryRecord:
    meta: QueryMeta
    verdict: str  # proven | alarm

    @property
    def kind(self) -> str:
        return self.meta.kind

    @property
    def location(self) -> tuple[int, int]:
        return self.meta.loc


@dataclass
class Report:
    contract: str
    records: list[QueryRecord]
    invariant: CandidateInv | None = None
    elapsed: float = 0.0
    paths: int = 0
    candidates_tried: int = 0
    timed_out: bool = False
    solver_stats: dict = field(default_factory=dict)

    @property
    def proven(self) -> list[QueryRecord]:
        return [r for r in self.records if r.verdict == "proven"]

    @property
    def alarms(self) -> list[QueryRecord]:
        return [r for r in self.records if r.verdict == "alarm"]

    @property
    def success(self) -> bool:
        return not self.alarms

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.success else EXIT_ALARMS

    def alarm_lines(self, kind: str | None = None) -> set[int]:
        return {r.meta.line for r in self.alarms if kind is None or r.kind == kind}

    def proven_lines(self, kind: str | None = None) -> set[int]:
        return {r.meta.line for r in self.proven if kind is None or r.kind == kind}


def prepare(c: Contract, checkers=("arith",), inline_depth: int = 2) -> tuple[Contract, Contract]:
    """Instrument, then inline. Returns ``(instrumented, call_free)``."""
    inst = instrument(c, tuple(checkers))
    return inst, inline_calls(inst, inline_depth)


def run_cegis(
    inst: Contract,
    flat: Contract,
    solver: Solver,
    budget: float = 60.0,
    max_workset: int = DEFAULT_MAX_WORKSET,
    max_atom_size: int = DEFAULT_MAX_ATOM_SIZE,
    workers: int = 1,
) -> Report:
    """Algorithm 1 over an instrumented contract and its call-free form."""
    start = time.monotonic()
    validator = Validator(flat, solver, workers)
    ctx = RefineContext.of(flat)
    all_queries = queries(inst)
    reachable = {m for m in queries(flat)}
    # Queries that vanished with unreachable code hold vacuously.
    proven: set[QueryMeta] = {m for m in all_queries if m not in reachable}

    W = Workset(max_workset)
    W.add(CandidateInv.make(TRUE))
    seen: set[CandidateInv] = set(W.candidates())
    validated: set[CandidateInv] = set()
    accumulated: CandidateInv | None = None
    found: CandidateInv | None = None
    tried = 0
    timed_out = False

    while W:
        if time.monotonic() - start > budget:
            timed_out = True
            break
        cand = W.choose()
        if cand in validated:
            continue
        validated.add(cand)
        tried += 1
        r = validator.validate(cand.psi, cand.mu)
        if r.inductive:
            proven |= r.proven_queries
            accumulated = cand if accumulated is None else accumulated.conjoin(cand)
            if not r.unproven:
                found = cand
                break
            if proven >= set(all_queries):
                # Conjunction of inductive candidates is inductive and proves all.
                found = accumulated
                break
        W.extend(generate(r.unproven, cand, ctx, seen, max_atom_size))
        if r.inductive:
            W.strengthen(cand)

    records = [QueryRecord(m, "proven" if m in proven else "alarm") for m in all_queries]
    if not all_queries and found is None:
        found = CandidateInv.make(TRUE)
    return Report(
        contract=inst.name,
        records=records,
        invariant=found if all(r.verdict == "proven" for r in records) else None,
        elapsed=time.monotonic() - start,
        paths=len(validator.shapes),
        candidates_tried=tried,
        timed_out=timed_out,
        solver_stats=solver.stats.as_dict(),
    )


def verify_contract(c: Contract, config: RunConfig | None = None, solver: Solver | None = None) -> Report:
    config = config or RunConfig(width=c.width)
    solver = solver or Solver(config.solver_cmd, config.solver_timeout)
    inst, flat = prepare(c, config.checkers, config.inline_depth)
    return run_cegis(
        inst,
        flat,
        solver,
        config.global_budget,
        config.max_workset,
        config.max_atom_size,
        config.workers,
    )


def verify_source(source: str, config: RunConfig | None = None, solver: Solver | None = None) -> Report:
    config = config or RunConfig()
    return verify_contract(parse(source, width=config.width), config, solver)


def verify(config: RunConfig, solver: Solver | None = None) -> Report:
    if config.input_path is None:
        raise ValueError("RunConfig.input_path is required")
    return verify_source(Path(config.input_path).read_text(), config, solver)


def paths_text(c: Contract, config: RunConfig | None = None) -> str:
    config = config or RunConfig(width=c.width)
    _, flat = prepare(c, config.checkers, config.inline_depth)
    return dump_paths(build_paths(flat, TRUE, {}))


# ---------------------------------------------------------------------------
# Emission

def invariant_dict(inv: CandidateInv | None) -> dict | None:
    if inv is None:
        return None
    return {"transaction": pretty(inv.psi), "loops": {l: pretty(f) for l, f in inv.mu_items}}


def report_dict(r: Report) -> dict:
    return {
        "schema": "txguard-report/1",
        "contract": r.contract,
        "success": r.success,
        "queries": [
            {
                "id": q.meta.id,
                "kind": q.kind,
                "line": q.location[0],
                "col": q.location[1],
                "verdict": q.verdict,
            }
            for q in r.records
        ],
        "summary": {"total": len(r.records), "proven": len(r.proven), "alarms": len(r.alarms)},
        "invariant": invariant_dict(r.invariant),
        "stats": {
            "elapsed_seconds": round(r.elapsed, 3),
            "paths": r.paths,
            "candidates_tried": r.candidates_tried,
            "timed_out": r.timed_out,
            "solver": r.solver_stats,
        },
    }


def emit_report(r: Report, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report_dict(r), indent=2, ensure_ascii=False)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"{q.location[0]}:{q.location[1]} {q.kind} {q.verdict}" for q in r.records]
    lines.append(
        f"# {r.contract}: {len(r.records)} queries, {len(r.proven)} proven, "
        f"{len(r.alarms)} alarms ({r.elapsed:.2f}s, {r.candidates_tried} candidates"
        f"{', budget exhausted' if r.timed_out else ''})"
    )
    if r.invariant is not None:
        lines.append(f"# invariant: {r.invariant}")
    return "\n".join(lines)
