from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idinfer import fixtures
from idinfer.decomposition import partition, red_tail
from idinfer.evaluator import DecisionRule, eval_fun, eval_id, exp_val, optimal_rule
from idinfer.factors import Factor, Variable
from idinfer.generate import random_diagram
from idinfer.model import DiagramError, InfluenceDiagram, random_node, value_node
from idinfer.oracle import brute_force, policy_value

from oracles import joint_table


def test_lone_decision():
    result = eval_id(fixtures.lone_decision())
    assert result.expected_value == pytest.approx(5.0, abs=1e-12)
    assert result.rule("d").flat() == [1]
    assert result.rule("d").scope == ()


def test_lone_decision_functional_is_the_utility_table():
    diagram = fixtures.lone_decision()
    parts = partition(diagram, "d")
    e, marginal, queries = eval_fun(red_tail(diagram, "d", parts), parts)
    assert np.allclose(e.flat(), [1, 5, 2])
    assert marginal.item() == pytest.approx(1.0)


def test_zero_decisions():
    result = eval_id(fixtures.zero_decisions())
    assert result.policy == []
    assert result.expected_value == pytest.approx(6.0, abs=1e-12)


def test_two_values_by_hand():
    # f=0: P=.635, utilities 4.1 vs 2.7075 -> keep umbrella closed
    # f=1: P=.365, utilities -3.1 vs 1.1925 -> open it
    result = eval_id(fixtures.two_values())
    assert result.expected_value == pytest.approx(4.1 + 1.1925, abs=1e-12)
    assert result.rule("umbrella").flat() == [0, 1]


def test_four_decision_stage_makes_two_inference_calls():
    result = eval_id(fixtures.four_decisions())
    first = result.trace[0]
    assert first.decision == "d_4"
    assert len(first.queries) == 2
    # the context query sees just the two isolated uniform roots
    assert first.queries[0].nodes == 2
    assert result.rule("d_4").names == ("c_10", "d_2")


def test_optimal_rule_tie_and_argmax():
    d = Variable("d", 3)
    assert optimal_rule(Factor([d], [1, 5, 2]), "d").flat() == [1]
    assert optimal_rule(Factor([d], [2, 2, 2]), "d").flat() == [0]
    rng = np.random.default_rng(0)
    a = Variable("a", 3)
    for _ in range(20):
        e = Factor([a, d], rng.normal(size=9))
        rule = optimal_rule(e, "d")
        table = e.aligned(["a", "d"])
        assert all(table[i, rule.flat()[i]] == table[i].max() for i in range(3))


def test_exp_val_examples():
    a = Variable("a", 2)
    net = InfluenceDiagram([random_node(a, [], [0.4, 0.6]), value_node("v", [a], [0.0, 10.0])])
    assert exp_val(net)[0] == pytest.approx(6.0)
    two = net.with_nodes([value_node("w", [a], [-1.0, 1.0])])
    assert exp_val(two)[0] == pytest.approx(6.0 + 0.2)
    with pytest.raises(DiagramError):
        exp_val(fixtures.lone_decision())


def test_exp_val_matches_joint_enumeration(diagrams):
    for diagram in diagrams:
        if diagram.decision_nodes:
            continue
        bn = InfluenceDiagram(diagram[n] for n in diagram.random_nodes)
        names, joint = joint_table(bn)
        expected = 0.0
        for v in diagram.value_nodes:
            f = diagram[v].utility
            axes = [names.index(n) for n in f.names]
            other = tuple(i for i in range(len(names)) if i not in axes)
            marginal = joint.sum(axis=other) if other else joint
            expected += float((marginal * f.values).sum())
        assert exp_val(diagram)[0] == pytest.approx(expected, abs=1e-8)


def test_functional_is_conditional_expected_utility(diagrams):
    # e(pi_r, d) against E[sum of tail utilities | pi_r, d] in the tail's joint
    for diagram in diagrams[:100]:
        if not diagram.decision_nodes:
            continue
        d = diagram.decision_order[-1]
        parts = partition(diagram, d)
        t = red_tail(diagram, d, parts)
        e, _, _ = eval_fun(t, parts)
        bn = InfluenceDiagram(t[n] for n in t if n not in parts.tail_values)
        names, joint = joint_table(bn)
        keep = [*parts.pi_relevant, d]
        utility = np.zeros(joint.shape)
        for v in parts.tail_values:
            f = diagram[v].utility
            shape = [bn.variable(n).cardinality if n in f.names else 1 for n in names]
            utility = utility + np.transpose(f.values, [f.names.index(n) for n in names if n in f.names]).reshape(shape)
        other = tuple(i for i, n in enumerate(names) if n not in keep)
        p = joint.sum(axis=other)
        eu = (joint * utility).sum(axis=other)
        kept = [n for n in names if n in keep]
        table = e.aligned(kept)
        positive = p > 1e-12
        assert np.all(np.abs(table[positive] - eu[positive] / p[positive]) <= 1e-8)


def test_matches_oracle_on_suite(small_suite):
    for diagram in small_suite:
        result = eval_id(diagram)
        best = brute_force(diagram).expected_value
        assert abs(result.expected_value - best) <= 1e-8
        assert abs(policy_value(diagram, result.policy) - best) <= 1e-8
        assert len(result.stage_stats) == len(diagram.decision_nodes) + 1


def test_conforming_orders_give_the_same_answer(small_suite):
    for diagram in small_suite:
        a = eval_id(diagram)
        b = eval_id(diagram, conform=True)
        assert abs(a.expected_value - b.expected_value) <= 1e-9


def test_rules_use_only_relevant_parents(small_suite):
    for diagram in small_suite:
        result = eval_id(diagram)
        for stage in result.trace:
            assert result.rule(stage.decision).names == stage.parts.pi_relevant


def test_extra_observed_root_changes_nothing(small_suite):
    for diagram in small_suite:
        if not diagram.decision_nodes:
            continue
        d = diagram.decision_order[-1]
        noise = Variable("zz_noise", 2)
        node = diagram[d]
        extra = diagram.with_nodes([
            random_node(noise, [], [0.3, 0.7]),
            type(node)(d, node.kind, node.parents + ("zz_noise",), node.variable),
        ])
        a, b = eval_id(diagram), eval_id(extra)
        assert abs(a.expected_value - b.expected_value) <= 1e-9
        assert "zz_noise" not in b.rule(d).names
        assert set(b.rule(d).names) <= set(a.rule(d).names) | {"zz_noise"}


def test_invalid_diagram_is_rejected():
    with pytest.raises(DiagramError):
        eval_id(fixtures.value_with_child())


def test_decision_rule_equality():
    d, a = Variable("d", 2), Variable("a", 2)
    r = DecisionRule(d, (a,), np.array([0, 1]))
    assert r == DecisionRule(d, (a,), np.array([0, 1]))
    assert r != DecisionRule(d, (a,), np.array([1, 1]))
    assert r.action({"a": 1}) == 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.floats(-100, 100), lam=st.floats(0.01, 100))
def test_value_shifts_and_scales_with_utilities(seed, k, lam):
    diagram = random_diagram(np.random.default_rng(seed))
    if not diagram.value_nodes:
        return
    v = diagram.value_nodes[0]
    u = diagram[v].utility
    shifted = diagram.with_nodes([replace(diagram[v], utility=Factor(u.scope, u.values + k))])
    scaled = diagram.with_nodes([replace(diagram[w], utility=Factor(diagram[w].utility.scope,
                                                                   diagram[w].utility.values * lam))
                                 for w in diagram.value_nodes])
    base = eval_id(diagram)
    assert eval_id(shifted).expected_value == pytest.approx(base.expected_value + k, abs=1e-9)
    assert eval_id(scaled).expected_value == pytest.approx(lam * base.expected_value, rel=1e-9, abs=1e-12)
