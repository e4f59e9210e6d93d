"""Multiplication counts of the reduction against fusion on random diagrams.

For every tail met while solving a seeded suite, prints how often each
ratio occurs next to its ``1 + m`` ceiling, where ``m`` is the number of
utility nodes in that tail.  Run with ``python3 demos/cost_profile.py [count]``.
"""

import sys
from collections import Counter

from idinfer.baselines import tail_rows
from idinfer.evaluator import eval_id, global_order
from idinfer.generate import suite

count = int(sys.argv[1]) if len(sys.argv) > 1 else 100

rows = []
for diagram in suite(2024, count):
    order = global_order(diagram)
    rows.extend(tail_rows(eval_id(diagram, order=order), order))

by_m = Counter()
worst = {}
for r in rows:
    by_m[r.m] += 1
    worst[r.m] = max(worst.get(r.m, 0.0), r.ratio)

print(f"{len(rows)} tails from {count} diagrams")
print(f"{'m':>3}{'tails':>7}{'worst ratio':>13}{'ceiling':>9}")
for m in sorted(by_m):
    print(f"{m:>3}{by_m[m]:>7}{worst[m]:>13.3f}{1 + m:>9}")

smaller = sum(r.reduction_max_factor_size < r.fusion_max_factor_size for r in rows)
print(f"\nlargest factor strictly smaller than fusion's on {smaller} of {len(rows)} tails")
