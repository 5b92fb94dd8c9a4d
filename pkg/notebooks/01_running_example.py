"""Walkthrough: proving a counter never overflows.

The contract below increments ``n`` and resets it once it reaches 100. The
addition on line 5 is safe, but only because of a contract invariant that
bounds ``n`` between transactions. txguard finds that invariant itself.

Run with ``python3 notebooks/01_running_example.py``.
"""

from txguard.driver import RunConfig, emit_report, paths_text, verify_source
from txguard.lang import parse

SOURCE = """contract RunningExample {
  uint public n;
  constructor () { n = 1;}
  function f () public {
    n = n + 1;
    if (n >= 100) { n = 1; }
  }
}"""

# The verifier works on basic paths: the constructor, and each public
# function from one transaction boundary to the next.
print("basic paths:")
print(paths_text(parse(SOURCE, width=256)))

# The feedback loop proposes candidate invariants, checks them, and keeps
# strengthening until every query is proven.
report = verify_source(SOURCE, RunConfig(width=256))
print()
print(emit_report(report, "text"))

# The invariant it found is inductive and strong enough to rule out the
# overflow at n + 1.
assert report.success
print()
print(f"{report.candidates_tried} candidates tried over {report.paths} paths")
