import networkx as nx
import numpy as np
import pytest

from idinfer import fixtures
from idinfer.factors import Factor, Variable
from idinfer.model import (
    DECISION,
    RANDOM,
    DiagramError,
    InfluenceDiagram,
    Node,
    ancestral_set,
    decision_node,
    descendants,
    m_separated,
    moral_graph,
    prune_barren,
    random_node,
    tail_decision_node,
    validate,
    value_node,
)

from oracles import digraph, moral

X, Y, Z = Variable("x", 2), Variable("y", 2), Variable("z", 2)


def kinds(diagram):
    return [v.kind for v in validate(diagram)]


def test_fixtures_are_valid():
    for make in fixtures.FIXTURES.values():
        assert validate(make()) == []


def test_value_node_with_child_is_reported():
    problems = validate(fixtures.value_with_child())
    assert [p.kind for p in problems] == ["value-with-child"]
    assert problems[0].message == "value node has child v->d2"


def test_cycle_is_reported():
    d = InfluenceDiagram([
        Node("x", RANDOM, ("y",), X, cpt=Factor([Y, X], [0.5, 0.5, 0.5, 0.5])),
        Node("y", RANDOM, ("x",), Y, cpt=Factor([X, Y], [0.5, 0.5, 0.5, 0.5])),
    ])
    assert kinds(d) == ["cycle"]
    with pytest.raises(DiagramError):
        d.topological_order


def test_unnormalized_cpt_is_reported():
    d = InfluenceDiagram([random_node(X, [], [0.5, 0.6])])
    assert kinds(d) == ["unnormalized"]
    d = InfluenceDiagram([random_node(X, [], [1.5, -0.5])])
    assert kinds(d) == ["unnormalized"]


def test_unordered_decisions_are_irregular():
    a, b = Variable("a", 2), Variable("b", 2)
    d = InfluenceDiagram([decision_node(a), decision_node(b), value_node("v", [a, b], [0, 1, 2, 3])])
    assert kinds(d) == ["irregular"]


def test_forgetting_is_reported():
    a, b = Variable("a", 2), Variable("b", 2)
    d = InfluenceDiagram([
        random_node(X, [], [0.5, 0.5]),
        decision_node(a, ["x"]),
        random_node(Y, [a], [0.5, 0.5, 0.1, 0.9]),
        decision_node(b, ["y"]),
        value_node("v", [b], [0, 1]),
    ])
    problems = validate(d)
    assert [p.kind for p in problems] == ["forgetting"]
    assert problems[0].nodes == ("b", "a", "x")


def test_node_checks():
    with pytest.raises(DiagramError):
        Node("v", "value", ("x",), utility=Factor([Y], [0, 1]))
    with pytest.raises(DiagramError):
        Node("x", RANDOM, ("y",), X, cpt=Factor([X], [0.5, 0.5]))
    with pytest.raises(DiagramError):
        Node("x", DECISION, ("x",), X)
    with pytest.raises(DiagramError):
        InfluenceDiagram([decision_node(X, ["nope"])])


def test_decision_order_and_tail():
    d = fixtures.four_decisions()
    assert d.decision_order == ("d_1", "d_2", "d_3", "d_4")
    assert tail_decision_node(d) == "d_4"
    assert tail_decision_node(fixtures.observed_downstream()) == "d_2"
    with pytest.raises(DiagramError):
        tail_decision_node(fixtures.zero_decisions())


def test_topological_order_respects_arcs(diagrams):
    for diagram in diagrams[:40]:
        pos = {n: i for i, n in enumerate(diagram.topological_order)}
        assert all(pos[p] < pos[n] for n in diagram for p in diagram.parents(n))


def test_moral_graph_matches_networkx(diagrams):
    for diagram in diagrams[:60]:
        ours = moral_graph(diagram)
        ref = moral(diagram)
        assert {frozenset((a, b)) for a in ours for b in ours[a]} == {frozenset(e) for e in ref.edges}


def test_ancestors_and_descendants_match_networkx(diagrams):
    for diagram in diagrams[:60]:
        g = digraph(diagram)
        for n in diagram:
            assert ancestral_set(diagram, [n]) == nx.ancestors(g, n) | {n}
            assert descendants(diagram, [n]) == nx.descendants(g, n)


def test_m_separation_matches_path_search(diagrams):
    rng = np.random.default_rng(0)
    for diagram in diagrams[:40]:
        names = list(diagram)
        if len(names) < 3:
            continue
        g = moral(diagram)
        for _ in range(5):
            x, y = rng.choice(names, size=2, replace=False)
            others = [n for n in names if n not in (x, y)]
            sep = set(rng.choice(others, size=int(rng.integers(0, len(others) + 1)), replace=False))
            connected = any(not (set(path[1:-1]) & sep) for path in nx.all_simple_paths(g, x, y))
            if g.has_edge(x, y):
                connected = True
            assert m_separated(diagram, sep, x, y) == (not connected)


def test_prune_barren_is_repeated_and_respects_keep():
    chain = InfluenceDiagram([
        random_node(X, [], [0.5, 0.5]),
        random_node(Y, [X], [0.5, 0.5, 0.2, 0.8]),
    ])
    assert len(prune_barren(chain)) == 0
    assert list(prune_barren(chain, keep={"x"})) == ["x"]
    assert list(prune_barren(chain, keep={"y"})) == ["x", "y"]


def test_prune_barren_keeps_decisions_and_values():
    d = fixtures.two_values()
    assert set(prune_barren(d)) == set(d)
    extra = d.with_nodes([random_node(Z, [d.variable("weather")], [0.5, 0.5, 0.5, 0.5])])
    assert set(prune_barren(extra)) == set(d)


def test_generated_diagrams_are_valid(diagrams):
    assert all(validate(d) == [] for d in diagrams)
