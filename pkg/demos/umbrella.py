"""Weather, forecast and umbrella: one decision, two utility nodes.

Solves the diagram with every method and checks each policy by the oracle.
Run with ``python3 demos/umbrella.py``.
"""

from idinfer import brute_force, eval_id, eval_id1, policy_value
from idinfer.cli import render_result
from idinfer.fixtures import two_values

diagram = two_values()
print("nodes:", ", ".join(f"{n}({diagram[n].kind})" for n in diagram))
print()

result = eval_id(diagram)
print(render_result(result))
print()

# the same answer three ways
for method in (eval_id1, brute_force):
    other = method(diagram)
    print(f"{other.method:<12} {other.expected_value:.10f}  rule {other.rule('umbrella').flat()}")

# scoring the rule directly: open the umbrella only when rain is forecast
print(f"{'re-scored':<12} {policy_value(diagram, result.policy):.10f}")
