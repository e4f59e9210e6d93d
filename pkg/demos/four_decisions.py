"""Walk through the first stage of a four-decision diagram.

Shows how the parents of the last decision split, which nodes survive in the
reduced tail, the two inference calls made there and the utility node that
replaces the tail in the body.  Run with ``python3 demos/four_decisions.py``.
"""

import numpy as np

from idinfer.decomposition import aug_body, partition, red_tail
from idinfer.evaluator import eval_fun, eval_id
from idinfer.fixtures import four_decisions

np.set_printoptions(precision=4, suppress=True)

diagram = four_decisions()
d = diagram.decision_order[-1]
parts = partition(diagram, d)
for key, value in parts.as_dict().items():
    print(f"{key:<7} {value}")

t = red_tail(diagram, d, parts)
print("\nreduced tail:", sorted(t))

e, marginal, queries = eval_fun(t, parts)
for q in queries:
    print(f"query {q.label:<28} nodes={q.nodes} mults={q.stats.multiplications} "
          f"max size={q.stats.max_factor_size}")

print("\nexpected utility e(c_10, d_2, d_4):")
print(e.aligned(["c_10", "d_2", d]))

body = aug_body(diagram, d, e, parts)
print(f"\nbody keeps {len(body)} of {len(diagram)} nodes; new node u_{d} over {body[f'u_{d}'].parents}")

result = eval_id(diagram)
print("\norder solved:", [s.decision for s in result.trace])
print("expected value:", result.expected_value)
