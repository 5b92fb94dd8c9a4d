"""Command line: ``txguard verify`` and ``txguard oracle``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from txguard.driver import (
    CHECKERS,
    EXIT_ALARMS,
    EXIT_ERROR,
    EXIT_OK,
    RunConfig,
    emit_report,
    paths_text,
    verify_contract,
)
from txguard.invgen import DEFAULT_MAX_ATOM_SIZE, DEFAULT_MAX_WORKSET
from txguard.lang import LangError, parse
from txguard.solver.smtlib import DEFAULT_SOLVER_CMD, SolverUnavailable


def _checks(text: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [p for p in parts if p not in CHECKERS]
    if not parts or bad:
        raise argparse.ArgumentTypeError(f"expected a comma list over {','.join(CHECKERS)}")
    return parts


def _positive(kind):
    def conv(text: str):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="txguard", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="prove or report arithmetic/access-control queries")
    v.add_argument("file")
    v.add_argument("--width", type=_positive(int), default=256, help="bit-width of uint (default 256)")
    v.add_argument("--timeout", type=_positive(float), default=60.0,
                   help="global budget in seconds; no new iteration starts after it (default 60)")
    v.add_argument("--solver-timeout", type=_positive(float), default=10.0,
                   help="per-query solver timeout in seconds (default 10)")
    v.add_argument("--inline-depth", type=int, default=2, help="call inlining depth (default 2)")
    v.add_argument("--check", type=_checks, default=("arith",), help="arith,access (default arith)")
    v.add_argument("--report", choices=("text", "json"), default="text")
    v.add_argument("--dump-paths", action="store_true", help="print the basic paths and exit")
    v.add_argument("--solver-cmd", default=DEFAULT_SOLVER_CMD,
                   help=f"SMT-LIB solver reading a script on stdin (default {DEFAULT_SOLVER_CMD!r})")
    v.add_argument("--max-workset", type=_positive(int), default=DEFAULT_MAX_WORKSET)
    v.add_argument("--max-atom-size", type=_positive(int), default=DEFAULT_MAX_ATOM_SIZE)

    o = sub.add_parser("oracle", help="bounded exhaustive execution at a tiny width")
    o.add_argument("file")
    o.add_argument("--width", type=_positive(int), default=8)
    o.add_argument("--max-tx", type=int, default=3)
    o.add_argument("--max-domain", type=int, default=3, help="distinct address values (default 3)")
    o.add_argument("--check", type=_checks, default=("arith",))
    return ap


def _load(path: str, width: int):
    return parse(Path(path).read_text(), width=width)


def cmd_verify(args) -> int:
    config = RunConfig(
        input_path=args.file,
        width=args.width,
        inline_depth=args.inline_depth,
        global_budget=args.timeout,
        solver_timeout=args.solver_timeout,
        checkers=args.check,
        report_format=args.report,
        solver_cmd=args.solver_cmd,
        max_workset=args.max_workset,
        max_atom_size=args.max_atom_size,
    )
    c = _load(args.file, args.width)
    if args.dump_paths:
        print(paths_text(c, config))
        return EXIT_OK
    report = verify_contract(c, config)
    print(emit_report(report, args.report))
    return report.exit_code


def cmd_oracle(args) -> int:
    from txguard.oracle import oracle_search

    c = _load(args.file, args.width)
    r = oracle_search(c, args.max_tx, args.max_domain, checks=args.check)
    for m in r.queries:
        verdict = "violable" if m in r.violated else "safe-within-bound"
        print(f"{m.loc[0]}:{m.loc[1]} {m.kind} {verdict}")
    print(f"# {len(r.violated)} violable of {len(r.queries)}; {r.states} states, {r.executions} executions")
    return EXIT_ALARMS if r.violated else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_oracle(args)
    except LangError as exc:
        print(f"{args.file}:{exc.line}:{exc.col}: error: {exc.message}", file=sys.stderr)
    except (OSError, SolverUnavailable, ValueError, RuntimeError) as exc:
        print(f"txguard: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
