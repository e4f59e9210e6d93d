"""Evaluating influence diagrams through a sequence of Bayesian-network queries.

:func:`eval_id` repeatedly splits off the tail decision: it computes the
decision's evaluation functional in the reduced tail with a handful of
pruned :func:`~idinfer.inference.bn_inf` calls, reads off the optimal rule,
and continues on the (augmented, possibly reduced) body.  When no decisions
remain, the expected value of the residual value network is the optimal
expected utility of the original diagram.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import factors as fx
from .decomposition import (
    TailDecomposition,
    aug_body,
    cooper_transform,
    partition,
    red_body,
    red_tail,
)
from .factors import ArgTable, Factor, InferenceStats, Variable
from .inference import bn_inf, elimination_order, relevance_prune
from .model import DiagramError, InfluenceDiagram, prune_barren, tail_decision_node, validate


@dataclass(frozen=True)
class DecisionRule:
    """Action of ``decision`` for every configuration of ``scope``."""

    decision: Variable
    scope: tuple[Variable, ...]
    choices: np.ndarray

    @classmethod
    def from_argtable(cls, table: ArgTable) -> "DecisionRule":
        return cls(table.variable, table.scope, table.choices)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def action(self, assignment: dict) -> int:
        return int(self.choices[tuple(int(assignment[v.name]) for v in self.scope)])

    def flat(self) -> list[int]:
        return [int(c) for c in np.asarray(self.choices).ravel()]

    def __eq__(self, other):
        return (isinstance(other, DecisionRule) and self.decision == other.decision
                and self.scope == other.scope
                and np.array_equal(self.choices, other.choices))

    __hash__ = None


@dataclass
class QueryRecord:
    """One inference call: what it computed and on how many nodes."""

    label: str
    nodes: int
    stats: InferenceStats


@dataclass
class StageTrace:
    decision: str
    parts: TailDecomposition
    tail: InfluenceDiagram
    queries: list[QueryRecord]
    reduced: bool


@dataclass
class EvaluationResult:
    method: str
    policy: list[DecisionRule]
    expected_value: float
    stage_stats: list[InferenceStats] = field(default_factory=list)
    trace: list[StageTrace] = field(default_factory=list, repr=False)
    queries: list[QueryRecord] = field(default_factory=list, repr=False)

    def rule(self, decision: str) -> DecisionRule:
        for r in self.policy:
            if r.decision.name == decision:
                return r
        raise KeyError(decision)


class MethodNotApplicable(ValueError):
    """The chosen evaluation method does not handle this diagram."""


def merged(queries: Sequence[QueryRecord]) -> InferenceStats:
    total = InferenceStats()
    for q in queries:
        total.merge(q.stats)
    return total


def global_order(diagram: InfluenceDiagram) -> list[str]:
    """One min-fill order over all random and decision nodes of ``diagram``."""
    return elimination_order(diagram, keep=diagram.value_nodes)


# -- the tail ------------------------------------------------------------

def eval_fun(tail_bn: InfluenceDiagram, parts: TailDecomposition,
             order: Sequence[str] | None = None) -> tuple[Factor, Factor, list[QueryRecord]]:
    """Evaluation functional ``e(pi_r, d)`` of a reduced tail, and ``P(pi_r)``.

    One query over the ancestors of the relevant parents gives their joint
    marginal; one query per tail value node ``v`` gives ``P(v=1, pi_r, d)``
    on the ancestors of ``pi_r | {d, v}``.  ``d`` is an isolated uniform
    root of the tail, which accounts for the ``|d|`` factor below.
    Entries whose context has probability zero are set to 0.
    """
    d = parts.d
    relevant = list(parts.pi_relevant)
    queries = []

    context_net = relevance_prune(tail_bn, relevant)
    marginal, stats = bn_inf(context_net, relevant, order=order)
    queries.append(QueryRecord("P(pi_r)", len(context_net), stats))

    final = InferenceStats()
    dvar = tail_bn.variable(d)
    scope = [tail_bn.variable(n) for n in relevant] + [dvar]
    numerator = fx.Factor(scope, np.zeros([v.cardinality for v in scope]))
    offset = 0.0
    for v in parts.tail_values:
        node = tail_bn[v]
        net = relevance_prune(tail_bn, relevant + [d, v])
        joint, stats = bn_inf(net, relevant + [d], {v: 1}, order=order)
        queries.append(QueryRecord(f"P({v}=1, pi_r, d)", len(net), stats))
        numerator = fx.add(numerator, fx.scale(joint, node.scale, final), final)
        offset += node.offset

    denominator = fx.scale(marginal, 1.0 / dvar.cardinality, final)
    e = fx.divide(numerator, denominator, final)
    reachable = np.broadcast_to(fx._expand(denominator, e.scope), e.values.shape) > 0
    e = Factor._raw(e.scope, np.where(reachable, e.values - offset, 0.0))
    queries[-1].stats.absorb_final(final)
    return e, marginal, queries


def optimal_rule(e: Factor, d: str) -> DecisionRule:
    """Maximizing action of ``d`` per context; ties go to the lowest index."""
    _, table = fx.max_out(e, d)
    return DecisionRule.from_argtable(table)


# -- value networks ------------------------------------------------------

def exp_val(network: InfluenceDiagram, order: Sequence[str] | None = None) -> tuple[float, list[QueryRecord]]:
    """Expected total utility of a value network, one pruned query per value node."""
    if network.decision_nodes:
        raise DiagramError("expected value needs a network without decision nodes")
    bn = network.with_nodes(cooper_transform(network[v]) for v in network.value_nodes)
    total = 0.0
    queries = []
    for v in network.value_nodes:
        node = bn[v]
        net = relevance_prune(bn, [v])
        p, stats = bn_inf(net, [], {v: 1}, order=order)
        queries.append(QueryRecord(f"P({v}=1)", len(net), stats))
        total += p.item() * node.scale - node.offset
    return total, queries


# -- the driver ----------------------------------------------------------

TailSolver = Callable[[InfluenceDiagram, TailDecomposition, Sequence[str] | None],
                      tuple[Factor, Factor, list[QueryRecord]]]
NetworkSolver = Callable[[InfluenceDiagram, Sequence[str] | None], tuple[float, list[QueryRecord]]]


def solve(diagram: InfluenceDiagram, method: str, tail_solver: TailSolver,
          network_solver: NetworkSolver, order: Sequence[str] | None = None) -> EvaluationResult:
    """Tail/body loop shared by the reduction and fusion evaluators."""
    problems = validate(diagram)
    if problems:
        raise DiagramError("invalid diagram: " + "; ".join(p.message for p in problems))
    current = prune_barren(diagram)
    rules: dict[str, DecisionRule] = {}
    stage_stats, trace, records = [], [], []
    while current.decision_nodes:
        d = tail_decision_node(current)
        parts = partition(current, d)
        t = red_tail(current, d, parts)
        e, marginal, queries = tail_solver(t, parts, order)
        rules[d] = optimal_rule(e, d)
        nxt = aug_body(current, d, e, parts)
        if parts.pi2:
            nxt = red_body(nxt, marginal, t, parts)
        current = prune_barren(nxt)
        stage_stats.append(merged(queries))
        records.extend(queries)
        trace.append(StageTrace(d, parts, t, queries, bool(parts.pi2)))
    value, queries = network_solver(current, order)
    stage_stats.append(merged(queries))
    records.extend(queries)
    policy = [rules[d] for d in diagram.decision_order]
    return EvaluationResult(method, policy, value, stage_stats, trace, records)


def eval_id(diagram: InfluenceDiagram, order: Sequence[str] | None = None,
            conform: bool = False) -> EvaluationResult:
    """Optimal policy and expected utility of ``diagram``.

    Each inference call picks its own min-fill order unless ``order`` is
    given; ``conform=True`` uses :func:`global_order` for every call.
    """
    if order is None and conform:
        order = global_order(diagram)
    return solve(diagram, "reduction", eval_fun, exp_val, order)
