import numpy as np
import pytest

from idinfer import factors as fx
from idinfer import fixtures
from idinfer.baselines import (
    FactorLists,
    compare,
    eval_fun1,
    eval_id1,
    exp_val1,
    fuse,
    render_report,
    shachter_peot,
)
from idinfer.decomposition import partition, red_tail
from idinfer.evaluator import MethodNotApplicable, eval_fun, eval_id, exp_val
from idinfer.factors import Factor, Variable
from idinfer.model import InfluenceDiagram, random_node, value_node
from idinfer.oracle import brute_force

A = Variable("a", 2)


def test_fuse_probability_only():
    lists = fuse(FactorLists([Factor([A], [0.5, 0.5])], []), "a")
    assert len(lists.P) == 1 and lists.P[0].item() == pytest.approx(1.0)
    assert lists.F == []


def test_fuse_utility_without_probability_takes_the_mean():
    lists = fuse(FactorLists([], [Factor([A], [2.0, 4.0])]), "a")
    assert lists.P == []
    assert lists.F[0].item() == pytest.approx(3.0)


def test_fuse_untouched_variable():
    before = FactorLists([Factor([A], [0.5, 0.5])], [])
    after = fuse(before, "zz")
    assert after.P == before.P and after.F == before.F


def test_exp_val1_examples():
    net = InfluenceDiagram([random_node(A, [], [0.4, 0.6]), value_node("v", [A], [0.0, 10.0])])
    assert exp_val1(net)[0] == pytest.approx(6.0)
    assert exp_val1(InfluenceDiagram([random_node(A, [], [0.4, 0.6])]))[0] == 0.0


def _value_networks(diagrams):
    for diagram in diagrams:
        if not diagram.decision_nodes:
            yield diagram


def test_exp_val1_agrees_with_queries(diagrams):
    for net in _value_networks(diagrams):
        assert exp_val1(net)[0] == pytest.approx(exp_val(net)[0], abs=1e-8)


def test_fusion_conserves_total_expected_utility(diagrams):
    # (prod P) * (sum F) summed over everything stays fixed while fusing
    for net in _value_networks(diagrams):
        lists = FactorLists(net.factors(), [net[v].utility for v in net.value_nodes])

        def total(ls):
            joint = fx.product_all(ls.P)
            utility = fx.add_all(ls.F)
            scope = fx._union(joint.scope, utility.scope)
            return float((np.broadcast_to(fx._expand(joint, scope), [v.cardinality for v in scope])
                          * fx._expand(utility, scope)).sum())

        start = total(lists)
        for x in net.random_nodes:
            lists = fuse(lists, x)
            assert total(lists) == pytest.approx(start, rel=1e-8, abs=1e-10)


def test_fusion_functional_matches_query_functional(diagrams):
    for diagram in diagrams[:100]:
        if not diagram.decision_nodes:
            continue
        d = diagram.decision_order[-1]
        parts = partition(diagram, d)
        t = red_tail(diagram, d, parts)
        e, marginal, _ = eval_fun(t, parts)
        e1, marginal1, _ = eval_fun1(t, parts)
        assert marginal1.allclose(marginal, atol=1e-10)
        reachable = np.broadcast_to(fx._expand(marginal, e.scope), e.values.shape) > 1e-12
        assert np.all(np.abs(e.values - e1.values)[reachable] <= 1e-8)


def test_lone_decision_all_methods():
    diagram = fixtures.lone_decision()
    for method in (eval_id1, shachter_peot):
        result = method(diagram)
        assert result.expected_value == pytest.approx(5.0, abs=1e-12)
        assert result.rule("d").flat() == [1]


def test_zero_decisions_fusion():
    assert eval_id1(fixtures.zero_decisions()).expected_value == pytest.approx(6.0)


def test_shachter_peot_needs_one_value_node():
    with pytest.raises(MethodNotApplicable, match="method requires a single value node"):
        shachter_peot(fixtures.two_values())


def test_fusion_and_shachter_peot_agree_with_oracle(small_suite):
    for diagram in small_suite:
        best = brute_force(diagram).expected_value
        assert abs(eval_id1(diagram).expected_value - best) <= 1e-8
        if len(diagram.value_nodes) == 1:
            assert abs(shachter_peot(diagram).expected_value - best) <= 1e-8


def test_shachter_peot_queries_are_larger(diagrams):
    # its query for the last decision sees the whole relevant network, ours only the reduced tail
    compared = 0
    for diagram in diagrams:
        if len(diagram.value_nodes) != 1 or not diagram.decision_nodes:
            continue
        ours = eval_id(diagram)
        stage = ours.trace[0]
        parts = stage.parts
        value_queries = [q for q in stage.queries if q.label != "P(pi_r)"]
        if not value_queries:
            continue
        theirs = shachter_peot(diagram).queries[0]
        if parts.pi_irrelevant or parts.upstream:
            assert theirs.nodes > max(q.nodes for q in value_queries)
            compared += 1
    assert compared > 10


def test_compare_lone_decision():
    report = compare(fixtures.lone_decision(), oracle=True)
    assert [r.expected_value for r in report.rows] == pytest.approx([5.0] * 4)
    assert report.bound_holds and report.sizes_hold and report.values_agree
    assert "(1+m) bound: PASS" in render_report(report)


def test_compare_marks_oracle_skipped_over_cap():
    report = compare(fixtures.over_cap(), oracle=True)
    oracle_row = report.rows[-1]
    assert oracle_row.method == "brute-force" and oracle_row.note == "skipped (cap)"
    assert "skipped (cap)" in render_report(report)


def test_compare_with_two_tail_values():
    report = compare(fixtures.suite_m2())
    first = report.tails[0]
    assert first.m == 2
    assert first.ratio <= 3
    assert report.as_dict()["boundHolds"] is True
