"""Small hand-built diagrams used by the tests, the demos and the CLI docs.

``observed_downstream`` and ``four_decisions`` are reference structures
whose decomposition sets are known in advance and checked by the tests.
Their tables are drawn from fixed seeds.

Run ``python -m idinfer.fixtures DIR`` to write every fixture as a network
document.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .factors import Variable
from .generate import SuiteConfig, random_cpt, random_diagram, random_utility
from .model import DECISION, RANDOM, VALUE, InfluenceDiagram, Node, decision_node, random_node, value_node


def build(spec: list[tuple[str, str, list[str], int]], seed: int) -> InfluenceDiagram:
    """Diagram from ``(name, kind, parents, cardinality)`` rows in topological order."""
    rng = np.random.default_rng(seed)
    variables: dict[str, Variable] = {}
    nodes = []
    for name, kind, parents, card in spec:
        pvars = [variables[p] for p in parents]
        shape = tuple(v.cardinality for v in pvars)
        if kind == VALUE:
            nodes.append(value_node(name, pvars, random_utility(rng, shape)))
            continue
        variables[name] = Variable(name, card)
        if kind == DECISION:
            nodes.append(decision_node(variables[name], parents))
        else:
            nodes.append(random_node(variables[name], pvars, random_cpt(rng, shape + (card,))))
    return InfluenceDiagram(nodes)


def observed_downstream() -> InfluenceDiagram:
    """Two decisions; ``c_4`` is a parent of ``d_2`` that depends on the downstream ``c_6``."""
    R, D, V = RANDOM, DECISION, VALUE
    return build([
        ("c_1", R, [], 2),
        ("c_2", R, ["c_1"], 2),
        ("c_3", R, ["c_2"], 2),
        ("d_1", D, ["c_3"], 2),
        ("c_5", R, ["c_1"], 2),
        ("c_6", R, ["d_1"], 2),
        ("c_4", R, ["c_6"], 2),
        ("d_2", D, ["d_1", "c_3", "c_4"], 2),
        ("v_1", V, ["c_5", "d_1"], 0),
        ("v_2", V, ["d_2", "c_6"], 0),
    ], seed=1)


def four_decisions() -> InfluenceDiagram:
    """Four decisions; the last one's relevant parents are ``c_10`` and ``d_2``."""
    R, D, V = RANDOM, DECISION, VALUE
    return build([
        ("c_1", R, [], 2),
        ("d_1", D, ["c_1"], 2),
        ("c_2", R, ["c_1", "d_1"], 2),
        ("c_3", R, ["c_2"], 2),
        ("v_1", V, ["c_2", "d_1"], 0),
        ("d_2", D, ["c_1", "d_1", "c_3"], 2),
        ("c_4", R, ["c_3", "d_2"], 2),
        ("c_5", R, ["c_4"], 2),
        ("c_6", R, ["c_4"], 2),
        ("c_9", R, ["c_5"], 2),
        ("v_2", V, ["c_9", "d_2"], 0),
        ("d_3", D, ["c_1", "d_1", "c_3", "d_2", "c_6"], 2),
        ("c_7", R, ["c_6", "d_3"], 2),
        ("c_8", R, ["c_7"], 2),
        ("v_3", V, ["c_7", "d_3"], 0),
        ("c_10", R, ["c_8"], 2),
        ("d_4", D, ["c_1", "d_1", "c_3", "d_2", "c_6", "d_3", "c_10"], 2),
        ("c_11", R, ["c_10", "d_2"], 2),
        ("c_12", R, ["c_11", "d_4"], 2),
        ("v_4", V, ["c_12"], 0),
    ], seed=3)


def lone_decision() -> InfluenceDiagram:
    """One ternary decision with utility ``[1, 5, 2]``; the optimum is action 1 worth 5."""
    d = Variable("d", 3)
    return InfluenceDiagram([decision_node(d), value_node("v", [d], [1.0, 5.0, 2.0])])


def two_values() -> InfluenceDiagram:
    """A weather/umbrella style diagram with a reward and a separate cost."""
    w, f, d = Variable("weather", 2), Variable("forecast", 2), Variable("umbrella", 2)
    return InfluenceDiagram([
        random_node(w, [], [0.7, 0.3]),
        random_node(f, [w], [0.8, 0.2, 0.25, 0.75]),
        decision_node(d, ["forecast"]),
        value_node("comfort", [w, d], [10.0, 6.0, -20.0, 4.0]),
        value_node("cost", [d], [0.0, -1.5]),
    ])


def zero_decisions() -> InfluenceDiagram:
    a = Variable("a", 2)
    return InfluenceDiagram([random_node(a, [], [0.4, 0.6]), value_node("v", [a], [0.0, 10.0])])


def reduced_body_example() -> InfluenceDiagram:
    """The last decision observes ``s``, whose parent ``h`` also drives the downstream utility."""
    h, s, d1, d2 = Variable("h", 3), Variable("s", 2), Variable("d1", 2), Variable("d2", 2)
    return InfluenceDiagram([
        decision_node(d1),
        random_node(h, [d1], [0.5, 0.3, 0.2, 0.1, 0.3, 0.6]),
        random_node(s, [h], [0.9, 0.1, 0.5, 0.5, 0.2, 0.8]),
        decision_node(d2, ["d1", "s"]),
        value_node("v1", [d1], [0.0, -1.0]),
        value_node("v2", [h, d2], [4.0, -2.0, 1.0, 1.0, -3.0, 5.0]),
    ])


def value_with_child() -> InfluenceDiagram:
    """Invalid: a decision observes a utility."""
    d1, d2 = Variable("d1", 2), Variable("d2", 2)
    return InfluenceDiagram([
        decision_node(d1),
        value_node("v", [d1], [0.0, 1.0]),
        Node("d2", DECISION, ("d1", "v"), d2),
        value_node("w", [d2], [1.0, 0.0]),
    ])


def over_cap() -> InfluenceDiagram:
    """A decision watching three ternary signals: 2**27 policies, beyond the default oracle cap."""
    nodes = []
    signals = []
    for name in ("a", "b", "c"):
        var = Variable(name, 3)
        signals.append(var)
        nodes.append(random_node(var, [], [0.2, 0.3, 0.5]))
    d = Variable("d", 2)
    nodes.append(decision_node(d, ["a", "b", "c"]))
    rng = np.random.default_rng(7)
    nodes.append(value_node("v", [signals[0], d], rng.uniform(-5, 5, size=6)))
    return InfluenceDiagram(nodes)


def suite_m2() -> InfluenceDiagram:
    """A generated instance whose tail holds two value nodes."""
    return random_diagram(np.random.default_rng(10), SuiteConfig())


FIXTURES = {
    "observed_downstream": observed_downstream,
    "four_decisions": four_decisions,
    "lone_decision": lone_decision,
    "two_values": two_values,
    "zero_decisions": zero_decisions,
    "reduced_body": reduced_body_example,
    "over_cap": over_cap,
    "suite_m2": suite_m2,
}

INVALID = {
    "value_with_child": value_with_child,
}


def write_all(directory) -> list[Path]:
    """Valid fixtures go to ``directory``, deliberately broken ones to ``directory/invalid``."""
    from .documents import diagram_to_dict, save_diagram

    directory = Path(directory)
    (directory / "invalid").mkdir(parents=True, exist_ok=True)
    paths = []
    for name, make in FIXTURES.items():
        paths.append(directory / f"{name}.json")
        save_diagram(make(), paths[-1])
    for name, make in INVALID.items():
        paths.append(directory / "invalid" / f"{name}.json")
        save_diagram(make(), paths[-1])
    # a CPT one entry short
    broken = diagram_to_dict(two_values())
    broken["nodes"][1]["table"].pop()
    paths.append(directory / "invalid" / "bad_table_length.json")
    paths[-1].write_text(json.dumps(broken, indent=2) + "\n")
    return paths


if __name__ == "__main__":
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(p)
