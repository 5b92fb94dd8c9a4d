"""Walkthrough: checking alarms against exhaustive execution.

At a small bit-width every transaction sequence up to a bound can be run
concretely. A query the oracle violates is a real bug; a query the verifier
proves must never be violable. Here both tools look at a contract that
divides by a user-supplied value.

Run with ``python3 notebooks/03_oracle_cross_check.py``.
"""

from txguard.driver import RunConfig, verify_source
from txguard.lang import parse
from txguard.oracle import oracle_search

SOURCE = """contract Split {
  uint total;
  uint parts;
  constructor () { total = 12; parts = 3; }
  function share(uint k) public returns (uint) {
    uint a = total / k;
    uint b = total / parts;
    return a + b;
  }
}"""

contract = parse(SOURCE, width=4)
found = oracle_search(contract, max_tx=2)
report = verify_source(SOURCE, RunConfig(width=4, global_budget=10))

print(f"oracle: {found.states} states, {found.executions} executions")
for q in report.records:
    line, col = q.location
    real = "violable" if q.meta in found.violated else "not violated"
    print(f"{line}:{col} {q.kind:14} verifier {q.verdict:6} oracle {real}")

# Soundness: nothing the oracle can violate is reported as proven.
assert not found.violated & {q.meta for q in report.proven}
