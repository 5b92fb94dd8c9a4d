"""Bounded concrete-execution bug oracle.

Executes an instrumented contract exhaustively at a tiny bit-width: every
sequence of at most ``max_tx`` public calls after the constructor, with every
argument drawn from small domains. An assertion whose condition is false on
some execution is *violable*. ``assume(false)`` prunes an execution, but
assertions already reached stay recorded, as in the verifier's semantics.

Statements are compiled into closures once; states are deduplicated between
transaction rounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

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
    QueryMeta,
    Seq,
    Stmt,
    While,
)
from txguard.lang.instrument import instrument
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
    free_vars,
    max_value,
    sort_of,
)
from txguard.semantics import ArrayValue, arith, default_value, evaluate, true_sum

__all__ = [
    "BudgetExceeded",
    "ConcreteState",
    "OracleResult",
    "evaluate",
    "execute_atomic",
    "oracle_run",
    "oracle_search",
]

MAX_WIDTH = 8
MAX_TX = 4
MAX_DOMAIN = 3


class BudgetExceeded(RuntimeError):
    """The bounded state space is larger than the configured cap."""


class _Prune(Exception):
    """Raised by ``assume(false)``."""


Env = dict  # variable name -> int | ArrayValue


# ---------------------------------------------------------------------------
# Compilation of expressions

_RELOPS: dict[str, Callable[[int, int], bool]] = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def compile_term(t) -> Callable[[Env], object]:
    if isinstance(t, Var):
        name = t.name
        return lambda env: env[name]
    if isinstance(t, Const):
        v = t.value
        return lambda env: v
    if isinstance(t, BinOp):
        w = sort_of(t.left).width  # type: ignore[union-attr]
        op = t.op
        fl, fr = compile_term(t.left), compile_term(t.right)
        m = max_value(w)
        if op == "+":
            return lambda env: (fl(env) + fr(env)) & m
        if op == "-":
            return lambda env: (fl(env) - fr(env)) & m
        if op == "*":
            return lambda env: (fl(env) * fr(env)) & m
        return lambda env: arith(op, fl(env), fr(env), w)
    if isinstance(t, Select):
        fa, fi = compile_term(t.array), compile_term(t.index)
        return lambda env: fa(env)[fi(env)]
    if isinstance(t, Store):
        fa, fi, fv = compile_term(t.array), compile_term(t.index), compile_term(t.value)
        return lambda env: fa(env).store(fi(env), fv(env))
    if isinstance(t, Sum):
        fa = compile_term(t.array)
        srt = sort_of(t.array)
        return lambda env: true_sum(fa(env), srt)  # type: ignore[arg-type]
    raise TypeError(f"not a term: {t!r}")


def compile_formula(f: Expr) -> Callable[[Env], bool]:
    if isinstance(f, BoolConst):
        v = f.value
        return lambda env: v
    if isinstance(f, BoolVar):
        name = f.name
        return lambda env: bool(env[name])
    if isinstance(f, Atom):
        rel = _RELOPS[f.rel]
        fl, fr = compile_term(f.left), compile_term(f.right)
        return lambda env: rel(fl(env), fr(env))
    if isinstance(f, Not):
        g = compile_formula(f.arg)
        return lambda env: not g(env)
    if isinstance(f, And):
        gs = [compile_formula(a) for a in f.args]
        return lambda env: all(g(env) for g in gs)
    if isinstance(f, Or):
        gs = [compile_formula(a) for a in f.args]
        return lambda env: any(g(env) for g in gs)
    if isinstance(f, Implies):
        p, q = compile_formula(f.premise), compile_formula(f.conclusion)
        return lambda env: (not p(env)) or q(env)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Compilation of statements
#
# A compiled statement maps a list of environments to a list of
# environments; more than one result only arises from sampled external
# call results or havoc.

Runner = Callable[[list], list]


def _nested_store(arr, idx: Sequence, value):
    if len(idx) == 1:
        return arr.store(idx[0], value)
    return arr.store(idx[0], _nested_store(arr[idx[0]], idx[1:], value))


@dataclass
class _Ctx:
    contract: Contract
    violated: set
    choices: Callable[[Sort], Sequence]
    max_loop: int
    globals: frozenset
    steps: list  # single counter cell, shared


class _Compiler:
    def __init__(self, ctx: _Ctx):
        self.ctx = ctx
        self.functions: dict[str, Runner] = {}

    def function(self, f: Function) -> Runner:
        if f.name not in self.functions:
            self.functions[f.name] = lambda envs: envs  # recursion guard
            self.functions[f.name] = self.stmt(f.body)
        return self.functions[f.name]

    def stmt(self, s: Stmt) -> Runner:
        ctx = self.ctx
        if isinstance(s, Seq):
            parts = [self.stmt(x) for x in s.stmts]

            def run_seq(envs):
                for p in parts:
                    if not envs:
                        return envs
                    envs = p(envs)
                return envs

            return run_seq
        if isinstance(s, Assign):
            name, fv = s.target.name, compile_term(s.value)

            def run_assign(envs):
                for e in envs:
                    e[name] = fv(e)
                return envs

            return run_assign
        if isinstance(s, ArrAssign):
            name = s.target.name
            fis = [compile_term(i) for i in s.indices]
            fv = compile_term(s.value)

            def run_store(envs):
                for e in envs:
                    e[name] = _nested_store(e[name], [fi(e) for fi in fis], fv(e))
                return envs

            return run_store
        if isinstance(s, Assume):
            g = compile_formula(s.cond)
            return lambda envs: [e for e in envs if g(e)]
        if isinstance(s, Assert):
            g = compile_formula(s.cond)
            meta = s.meta

            def run_assert(envs):
                for e in envs:
                    if not g(e):
                        ctx.violated.add(meta)
                return envs

            return run_assert
        if isinstance(s, Havoc):
            names = list(s.names)

            def run_havoc(envs):
                out = []
                for e in envs:
                    sorts = [_sort_in(e, n, ctx) for n in names]
                    for vals in itertools.product(*(ctx.choices(srt) for srt in sorts)):
                        ne = dict(e)
                        ne.update(zip(names, vals))
                        out.append(ne)
                return out

            return run_havoc
        if isinstance(s, If):
            g = compile_formula(s.cond)
            yes, no = self.stmt(s.then), self.stmt(s.orelse)

            def run_if(envs):
                t = [e for e in envs if g(e)]
                f = [e for e in envs if not g(e)]
                return (yes(t) if t else t) + (no(f) if f else f)

            return run_if
        if isinstance(s, While):
            g = compile_formula(s.cond)
            body = self.stmt(s.body)
            cap = ctx.max_loop

            def run_while(envs):
                done = []
                for _ in range(cap + 1):
                    live = []
                    for e in envs:
                        (live if g(e) else done).append(e)
                    if not live:
                        return done
                    envs = body(live)
                raise BudgetExceeded(f"loop {s.label} exceeded {cap} iterations")

            return run_while
        if isinstance(s, Call):
            return self.call(s)
        raise TypeError(f"not a statement: {s!r}")

    def call(self, s: Call) -> Runner:
        ctx = self.ctx
        recv = s.receiver.name if s.receiver is not None else None
        if s.obj is not None:
            if recv is None:
                return lambda envs: envs
            srt = s.receiver.sort  # type: ignore[union-attr]

            def run_external(envs):
                out = []
                for e in envs:
                    for v in ctx.choices(srt):
                        ne = dict(e)
                        ne[recv] = v
                        out.append(ne)
                return out

            return run_external
        callee = ctx.contract.function(s.name)
        fargs = [compile_term(a) for a in s.args]
        params = [p.name for p in callee.params]
        lengths = {
            p.name: a.name
            for p, a in zip(callee.params, s.args)
            if isinstance(p.sort, ArraySort) and isinstance(a, Var)
        }
        local_defaults = {v.name: default_value(v.sort) for v in callee.locals}
        ret = callee.returns.name if callee.returns is not None else None
        body = self.function(callee)
        gnames = ctx.globals

        def run_call(envs):
            out = []
            for e in envs:
                frame = {k: v for k, v in e.items() if k in gnames or k.startswith("msg.")}
                frame.update(local_defaults)
                if ret is not None:
                    frame[ret] = 0
                for p, fa in zip(params, fargs):
                    frame[p] = fa(e)
                for p, a in lengths.items():
                    frame[f"{p}.length"] = e.get(f"{a}.length", 0)
                for fe in body([frame]):
                    ne = dict(e)
                    for k in gnames:
                        ne[k] = fe[k]
                    if recv is not None:
                        ne[recv] = fe[ret] if ret is not None else 0
                    out.append(ne)
            return out

        return run_call


def _sort_in(env: Env, name: str, ctx: _Ctx) -> Sort:
    for g in ctx.contract.global_vars:
        if g.name == name:
            return g.sort
    v = env.get(name)
    if isinstance(v, ArrayValue):
        raise BudgetExceeded(f"cannot havoc local map {name}")
    return BitVec(ctx.contract.width)


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class Domains:
    width: int
    address_width: int
    max_domain: int = MAX_DOMAIN
    uint_values: tuple[int, ...] | None = None  # None: the full range
    max_array_len: int = 2
    sample_values: tuple[int, ...] | None = None  # for external results

    def values(self, s: Sort) -> Sequence:
        if isinstance(s, BitVec):
            if s.width == self.address_width and s.width != self.width:
                return range(self.max_domain)
            if s.width == 1:
                return (0, 1)
            if s.width == self.width and self.uint_values is not None:
                return self.uint_values
            return range(1 << s.width)
        raise TypeError("array values are built by array_values")

    def samples(self, s: Sort) -> Sequence:
        if isinstance(s, BitVec) and s.width == self.width and self.sample_values is not None:
            return self.sample_values
        if isinstance(s, BitVec) and s.width == self.width:
            m = max_value(s.width)
            return sorted({0, 1, m // 2, m - 1, m})
        return self.values(s)

    def array_values(self, s: ArraySort) -> list[tuple[ArrayValue, int]]:
        out = []
        elems = list(self.values(s.elem))
        for n in range(self.max_array_len + 1):
            for vals in itertools.product(elems, repeat=n):
                out.append((ArrayValue.make(default_value(s.elem), dict(enumerate(vals))), n))
        return out


@dataclass(frozen=True)
class ConcreteState:
    """Global valuation, in declaration order."""

    names: tuple[str, ...]
    values: tuple
    width: int

    @property
    def globals(self) -> dict[str, int]:
        return {n: v for n, v in zip(self.names, self.values) if not isinstance(v, ArrayValue)}

    @property
    def maps(self) -> dict[str, ArrayValue]:
        return {n: v for n, v in zip(self.names, self.values) if isinstance(v, ArrayValue)}

    def env(self) -> Env:
        return dict(zip(self.names, self.values))


@dataclass
class OracleResult:
    violated: set[QueryMeta]
    states: int
    executions: int
    queries: list[QueryMeta]


def _mentions(f: Function, name: str) -> bool:
    from txguard.lang.ast import iter_stmts
    from txguard.lang.inline import _exprs

    for s in iter_stmts(f.body):
        for e in _exprs(s):
            if any(isinstance(v, Var) and v.name == name for v in free_vars(e)):
                return True
    return False


def _arg_valuations(f: Function, dom: Domains) -> list[dict]:
    axes: list[list[dict]] = []
    for p in f.params:
        if isinstance(p.sort, ArraySort):
            axes.append([{p.name: a, f"{p.name}.length": n} for a, n in dom.array_values(p.sort)])
        else:
            axes.append([{p.name: v} for v in dom.values(p.sort)])
    axes.append([{"msg.sender": v} for v in range(dom.max_domain)])
    if _mentions(f, "msg.value"):
        axes.append([{"msg.value": v} for v in dom.values(BitVec(dom.width))])
    out = []
    for combo in itertools.product(*axes):
        d: dict = {}
        for part in combo:
            d.update(part)
        out.append(d)
    return out


def oracle_search(
    c: Contract,
    max_tx: int = 3,
    max_domain: int = MAX_DOMAIN,
    checks: Iterable[str] = ("arith",),
    uint_values: Sequence[int] | None = None,
    max_states: int = 200_000,
    max_executions: int = 5_000_000,
    max_loop: int = 64,
    instrumented: bool = False,
) -> OracleResult:
    """Exhaustive bounded exploration; see :func:`oracle_run`."""
    if c.width > MAX_WIDTH:
        raise ValueError(f"oracle width must be <= {MAX_WIDTH}, got {c.width}")
    if max_tx > MAX_TX or max_domain > MAX_DOMAIN or max_tx < 0 or max_domain < 1:
        raise ValueError(f"need max_tx <= {MAX_TX} and 1 <= max_domain <= {MAX_DOMAIN}")
    inst = c if instrumented else instrument(c, tuple(checks))
    from txguard.lang.ast import queries

    dom = Domains(
        inst.width,
        inst.address_width,
        max_domain,
        None if uint_values is None else tuple(uint_values),
    )
    violated: set[QueryMeta] = set()
    names = tuple(g.name for g in inst.global_vars)
    ctx = _Ctx(inst, violated, dom.samples, max_loop, frozenset(names), [0])
    comp = _Compiler(ctx)
    all_q = queries(inst)
    executions = 0

    def run(f: Function, state: Env) -> list[ConcreteState]:
        nonlocal executions
        body = comp.function(f)
        locals_ = {v.name: default_value(v.sort) for v in f.locals}
        if f.returns is not None:
            locals_[f.returns.name] = 0
        out = []
        for args in _arg_valuations(f, dom):
            executions += 1
            if executions > max_executions:
                raise BudgetExceeded(f"more than {max_executions} executions")
            env = dict(state)
            env.update(locals_)
            env["msg.value"] = 0
            env.update(args)
            for e in body([env]):
                out.append(ConcreteState(names, tuple(e[n] for n in names), inst.width))
        return out

    zero = {g.name: default_value(g.sort) for g in inst.global_vars}
    frontier = set(run(inst.constructor, zero))
    seen = set(frontier)
    public = [f for f in inst.functions if f.is_public]
    for _ in range(max_tx):
        if len(violated) == len(all_q):
            break
        nxt: set[ConcreteState] = set()
        for st in sorted(frontier, key=repr):
            env = st.env()
            for f in public:
                for ns in run(f, env):
                    if ns not in seen:
                        seen.add(ns)
                        nxt.add(ns)
                        if len(seen) > max_states:
                            raise BudgetExceeded(f"more than {max_states} states")
        frontier = nxt
        if not frontier:
            break
    return OracleResult(violated, len(seen), executions, all_q)


def oracle_run(
    c: Contract,
    width: int | None = None,
    max_tx: int = 3,
    max_domain: int = MAX_DOMAIN,
    **kw,
) -> set[QueryMeta]:
    """Queries violated on some feasible execution of ``<= max_tx`` calls.

    ``c`` must be parsed at ``width`` (at most 8); queries are numbered as
    the verifier numbers them, so results compare directly with reports.
    """
    if width is not None and width != c.width:
        raise ValueError(f"contract was parsed at width {c.width}, not {width}")
    return oracle_search(c, max_tx, max_domain, **kw).violated


# ---------------------------------------------------------------------------
# Straight-line execution, used to test the symbolic semantics


def execute_atomic(
    stmts: Sequence[Stmt],
    state: Mapping[Var, object],
    havoc: Callable[[str], object] | None = None,
) -> tuple[dict[Var, object] | None, set]:
    """Run atomic statements on a version-0 valuation.

    Returns the final valuation (None if an assumption failed) and the
    assertions whose condition was false when reached.
    """
    by_name = {v.name: v for v in state}
    env: Env = {v.name: x for v, x in state.items()}
    bad: set = set()
    for a in stmts:
        if isinstance(a, Assign):
            env[a.target.name] = compile_term(a.value)(env)
        elif isinstance(a, ArrAssign):
            idx = [compile_term(i)(env) for i in a.indices]
            env[a.target.name] = _nested_store(env[a.target.name], idx, compile_term(a.value)(env))
        elif isinstance(a, Assume):
            if not compile_formula(a.cond)(env):
                return None, bad
        elif isinstance(a, Assert):
            if not compile_formula(a.cond)(env):
                bad.add(a.meta)
        elif isinstance(a, Havoc):
            if havoc is None:
                raise ValueError("havoc needs a value chooser")
            for n in a.names:
                env[n] = havoc(n)
        else:
            raise TypeError(f"not an atomic statement: {a!r}")
    return {by_name[n]: v for n, v in env.items() if n in by_name}, bad
