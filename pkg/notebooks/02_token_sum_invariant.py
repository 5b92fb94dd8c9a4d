"""Walkthrough: a token whose balances always add up to the supply.

Transfers move value between two cells of ``balance``. Proving that the
receiver's balance cannot overflow needs a fact about the whole mapping: the
sum of all balances equals the fixed supply. txguard expresses this with a
``sum(balance)`` atom and eliminates it before calling the solver.

Run with ``python3 notebooks/02_token_sum_invariant.py``.
"""

from importlib import resources

from txguard.driver import RunConfig, emit_report, verify_source

source = resources.files("txguard").joinpath("corpus", "fig4_btx.sol-core").read_text()
print(source)

report = verify_source(source, RunConfig(width=256, global_budget=60))
print(emit_report(report, "text"))

# The solver counters show how much was settled before reaching SMT.
stats = report.solver_stats
print()
print(
    f"solver queries: {stats['queries']}, templates: {stats['template_hits']}, "
    f"fast invalid: {stats['quick_invalid_hits']}, SMT calls: {stats['smt_calls']}"
)
