"""Run the GRV check on a few catalog entries and print the decay of the remainder."""
from grvar.catalog import get_entry

for name, n in [("log_gamma", 2), ("lambert_w", 3), ("loglog", None), ("log_floor", 2)]:
    e = get_entry(name, n)
    rep = e.check()
    tag = "expected failure" if e.expected_negative else ("pass" if e.outcome(rep) else "FAIL")
    print(f"{e.name:12s} n={e.n}  slope={rep.slope:+.3f}  final={rep.final_ratio:.2e}  {tag}")
