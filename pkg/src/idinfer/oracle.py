"""Exhaustive policy enumeration: the reference every evaluator is checked against.

The expected utility of a policy is computed from the full joint table over
all random and decision variables, with decision variables pinned by the
policy's indicator functions.  :func:`brute_force` scores every policy over
the full parent sets of the decisions, in lexicographic order, and keeps
the first one attaining the maximum.
"""

from __future__ import annotations

import itertools
from typing import Iterable

import numpy as np

from . import factors as fx
from .evaluator import DecisionRule, EvaluationResult
from .model import DiagramError, InfluenceDiagram, validate

DEFAULT_CAP = 10**6
CHUNK_ENTRIES = 2_000_000


class OracleCapExceeded(RuntimeError):
    pass


class _Joint:
    """Weighted joint table ``P(chance | parents) * sum of utilities`` over a diagram."""

    def __init__(self, diagram: InfluenceDiagram, cap: int):
        self.names = [n for n in diagram if not diagram[n].is_value]
        self.vars = [diagram.variable(n) for n in self.names]
        shape = tuple(v.cardinality for v in self.vars)
        size = int(np.prod(shape, dtype=np.int64))
        if size > cap:
            raise OracleCapExceeded(f"joint state space {size} exceeds cap {cap}")
        self.shape = shape
        self.size = size
        full = fx.ones(self.vars)
        weight = fx.product_all([full, *diagram.factors()])
        zeros = fx.Factor(self.vars, np.zeros(shape))
        utility = fx.add_all([zeros, *(diagram[v].utility for v in diagram.value_nodes)])
        # both scopes are name-sorted and equal to self.vars
        self.weighted = (weight.values * utility.values).ravel()
        self.grid = np.indices(shape).reshape(len(shape), -1) if shape else np.zeros((0, 1), int)

    def column(self, name: str) -> np.ndarray:
        return self.grid[self.names.index(name)]

    def config_index(self, names: Iterable[str], cards: Iterable[int]) -> np.ndarray:
        names, cards = list(names), list(cards)
        if not names:
            return np.zeros(self.size, dtype=np.int64)
        return np.ravel_multi_index([self.column(n) for n in names], cards)

    def rule_mask(self, rule: DecisionRule) -> np.ndarray:
        idx = self.config_index(rule.names, [v.cardinality for v in rule.scope])
        return np.asarray(rule.choices).ravel()[idx] == self.column(rule.decision.name)


def policy_value(diagram: InfluenceDiagram, policy: Iterable[DecisionRule], cap: int = DEFAULT_CAP) -> float:
    """Expected utility of ``policy``; each rule's scope must lie within the decision's parents."""
    joint = _Joint(diagram, cap)
    rules = {r.decision.name: r for r in policy}
    if set(rules) != set(diagram.decision_nodes):
        raise DiagramError(f"policy covers {sorted(rules)}, diagram decides {diagram.decision_nodes}")
    mask = np.ones(joint.size, dtype=bool)
    for d, rule in rules.items():
        if not set(rule.names) <= set(diagram.parents(d)):
            raise DiagramError(f"rule for {d} looks at non-parents {sorted(set(rule.names) - set(diagram.parents(d)))}")
        mask &= joint.rule_mask(rule)
    return float(joint.weighted[mask].sum())


def policy_space(diagram: InfluenceDiagram) -> int:
    """Number of deterministic policies over full parent scopes."""
    total = 1
    for d in diagram.decision_nodes:
        configs = int(np.prod([diagram.variable(p).cardinality for p in diagram.parents(d)], dtype=np.int64))
        total *= diagram.variable(d).cardinality ** configs
    return total


def _rule_tables(card: int, configs: int) -> np.ndarray:
    return np.array(list(itertools.product(range(card), repeat=configs)), dtype=np.int64).reshape(-1, configs)


def brute_force(diagram: InfluenceDiagram, cap: int = DEFAULT_CAP) -> EvaluationResult:
    problems = validate(diagram)
    if problems:
        raise DiagramError("invalid diagram: " + "; ".join(p.message for p in problems))
    count = policy_space(diagram)
    if count > cap:
        raise OracleCapExceeded(f"{count} policies exceed cap {cap}")
    joint = _Joint(diagram, cap)
    order = diagram.decision_order
    if not order:
        return EvaluationResult("brute-force", [], float(joint.weighted.sum()))

    # masks[i][r] marks the joint states consistent with rule r of decision i
    tables, masks = [], []
    for d in order:
        pvars = [diagram.variable(p) for p in sorted(diagram.parents(d))]
        cards = [v.cardinality for v in pvars]
        configs = int(np.prod(cards, dtype=np.int64))
        table = _rule_tables(diagram.variable(d).cardinality, configs)
        idx = joint.config_index([v.name for v in pvars], cards)
        masks.append(table[:, idx] == joint.column(d)[None, :])
        tables.append((pvars, cards, table))

    head, last = masks[:-1], masks[-1].astype(float)
    sizes = [m.shape[0] for m in head]
    n_prefix = int(np.prod(sizes, dtype=np.int64))
    chunk = max(1, CHUNK_ENTRIES // max(1, joint.size))
    best_value, best_index = -np.inf, None
    for start in range(0, n_prefix, chunk):
        ids = np.arange(start, min(n_prefix, start + chunk))
        block = np.broadcast_to(joint.weighted, (len(ids), joint.size)).copy()
        if head:
            for m, r in zip(head, np.unravel_index(ids, sizes)):
                block *= m[r]
        scores = block @ last.T
        top = float(scores.max())
        tol = 1e-12 * (1.0 + abs(top))
        if best_index is None or top > best_value + tol:
            flat = int(np.flatnonzero(scores.ravel() >= top - tol)[0])
            best_value = float(scores.ravel()[flat])
            best_index = (int(ids[flat // scores.shape[1]]), flat % scores.shape[1])

    prefix = np.unravel_index(best_index[0], sizes) if head else ()
    picks = [int(i) for i in prefix] + [best_index[1]]
    policy = []
    for d, (pvars, cards, table), r in zip(order, tables, picks):
        choices = table[r].reshape(cards) if cards else table[r].reshape(())
        policy.append(DecisionRule(diagram.variable(d), tuple(pvars), choices))
    # report the value of the chosen policy itself so re-evaluation reproduces it exactly
    return EvaluationResult("brute-force", policy, policy_value(diagram, policy, cap))
