"""Reference evaluators and the instrumented comparison between them.

* :func:`eval_id1` -- the same tail/body loop as :func:`~idinfer.evaluator.eval_id`
  but computing each evaluation functional by fusion: probabilities and
  utilities are kept in two lists and each variable is eliminated from both
  at once (:func:`fuse`).  With orders that agree with one global order this
  does the numerical work of Shenoy-style fusion.
* :func:`shachter_peot` -- single-value-node method: decisions become uniform
  random nodes, the value node a binary one, and each rule is an argmax of a
  posterior given ``v = 1`` over the whole network.
* :func:`compare` -- runs everything on one diagram and checks the operation
  count bound and the factor-size comparison tail by tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import factors as fx
from .decomposition import TailDecomposition, cooper_transform
from .evaluator import (
    EvaluationResult,
    MethodNotApplicable,
    QueryRecord,
    eval_id,
    global_order,
    merged,
    optimal_rule,
    solve,
)
from .factors import Factor, InferenceStats
from .inference import bn_inf, conforming_order, elimination_order, relevance_prune
from .model import RANDOM, DiagramError, InfluenceDiagram, Node, prune_barren, validate
from .oracle import DEFAULT_CAP, OracleCapExceeded, brute_force


@dataclass
class FactorLists:
    """Probability factors ``P`` and utility factors ``F``."""

    P: list[Factor] = field(default_factory=list)
    F: list[Factor] = field(default_factory=list)


def fuse(lists: FactorLists, x, stats: InferenceStats | None = None) -> FactorLists:
    """Eliminate ``x`` from both lists.

    Probabilities involving ``x`` are replaced by ``p = sum_x prod p_i``;
    utilities involving ``x`` by ``sum_x (sum f_j)(prod p_i) / p``.  With no
    probability factor on ``x`` the product is 1 and ``p = |x|``.
    """
    name = x.name if isinstance(x, fx.Variable) else x
    ps = [f for f in lists.P if name in f]
    fs = [f for f in lists.F if name in f]
    P = [f for f in lists.P if name not in f]
    F = [f for f in lists.F if name not in f]
    if ps:
        joint = fx.product_all(ps, stats)
        p = fx.sum_out(joint, name, stats)
        P.append(p)
    if fs:
        total = fx.add_all(fs, stats)
        if ps:
            weighted = fx.divide(fx.product(total, joint, stats), p, stats)
        else:
            weighted = fx.scale(total, 1.0 / total.variable(name).cardinality, stats)
        F.append(fx.sum_out(weighted, name, stats))
    return FactorLists(P, F)


def _observe_all(stats: InferenceStats, lists: FactorLists) -> None:
    for f in lists.P + lists.F:
        stats.observe(f)


def eval_fun1(tail_bn: InfluenceDiagram, parts: TailDecomposition,
              order: Sequence[str] | None = None) -> tuple[Factor, Factor, list[QueryRecord]]:
    """Evaluation functional of a reduced tail by fusing its downstream random nodes.

    Eliminates the downstream nodes other than ``d`` and the value nodes;
    ``d`` and the relevant parents stay.  Returns ``e(pi_r, d)``,
    ``P(pi_r)`` and one query record holding the counts.
    """
    d = parts.d
    values = set(parts.tail_values)
    lists = FactorLists(
        P=[n.cpt for name, n in tail_bn.nodes.items() if name not in values],
        F=[tail_bn[v].utility for v in parts.tail_values],
    )
    eliminate = {x for x in parts.downstream if x in tail_bn and x not in values and x != d}
    if order is None:
        order = elimination_order(tail_bn, keep=set(tail_bn) - eliminate)
    else:
        order = conforming_order(order, eliminate)

    stats = InferenceStats(calls=1)
    _observe_all(stats, lists)
    for x in order:
        lists = fuse(lists, x, stats)
    final = InferenceStats()
    joint = fx.product_all(lists.P, final)
    scope = [tail_bn.variable(n) for n in (*parts.pi_relevant, d)]
    e = fx.add(fx.Factor(scope, np.zeros([v.cardinality for v in scope])), fx.add_all(lists.F, final))
    marginal = fx.sum_out(joint, d, final)
    stats.absorb_final(final)
    return e, marginal, [QueryRecord("fusion", len(tail_bn), stats)]


def exp_val1(network: InfluenceDiagram, order: Sequence[str] | None = None) -> tuple[float, list[QueryRecord]]:
    """Expected utility of a value network by fusing every random node."""
    if network.decision_nodes:
        raise DiagramError("expected value needs a network without decision nodes")
    lists = FactorLists(P=network.factors(), F=[network[v].utility for v in network.value_nodes])
    eliminate = set(network.random_nodes)
    if order is None:
        order = elimination_order(network, keep=network.value_nodes)
    else:
        order = conforming_order(order, eliminate)
    stats = InferenceStats(calls=1)
    _observe_all(stats, lists)
    for x in order:
        lists = fuse(lists, x, stats)
    final = InferenceStats()
    value = fx.add_all(lists.F, final).item()
    stats.absorb_final(final)
    return value, [QueryRecord("fusion", len(network), stats)]


def eval_id1(diagram: InfluenceDiagram, order: Sequence[str] | None = None) -> EvaluationResult:
    """The tail/body loop with fusion in place of inference calls.

    All eliminations follow one global order (min-fill over the whole
    diagram unless ``order`` is given).
    """
    if order is None:
        order = global_order(diagram)
    return solve(diagram, "fusion", eval_fun1, exp_val1, order)


# -- Shachter and Peot ---------------------------------------------------

def shachter_peot(diagram: InfluenceDiagram, order: Sequence[str] | None = None) -> EvaluationResult:
    """Optimal policy of a single-value-node diagram via posteriors given ``v = 1``.

    Decisions are processed last to first; each is treated as a uniform
    random node until its rule is known, then as the deterministic node
    implementing the rule.  Rules look at all parents of the decision.
    """
    problems = validate(diagram)
    if problems:
        raise DiagramError("invalid diagram: " + "; ".join(p.message for p in problems))
    if len(diagram.value_nodes) != 1:
        raise MethodNotApplicable("method requires a single value node")
    base = prune_barren(diagram)
    (v,) = base.value_nodes
    nodes = [cooper_transform(base[v])]
    for d in base.decision_nodes:
        var = base.variable(d)
        pvars = tuple(base.variable(p) for p in base.parents(d))
        table = np.full([p.cardinality for p in pvars] + [var.cardinality], 1.0 / var.cardinality)
        nodes.append(Node(d, RANDOM, base.parents(d), var, cpt=Factor(pvars + (var,), table)))
    bn = base.with_nodes(nodes)

    rules, stage_stats, records = {}, [], []
    for d in reversed(diagram.decision_order):
        query = [d, *bn.parents(d)]
        net = relevance_prune(bn, query + [v])
        joint, stats = bn_inf(net, query, {v: 1}, order=order)
        rule = optimal_rule(joint, d)
        rules[d] = rule
        var = bn.variable(d)
        onehot = (np.asarray(rule.choices)[..., None] == np.arange(var.cardinality)).astype(float)
        bn = bn.with_nodes([Node(d, RANDOM, rule.names, var, cpt=Factor(rule.scope + (var,), onehot))])
        stage_stats.append(stats)
        records.append(QueryRecord(f"P({d}, pi_{d} | {v}=1)", len(net), stats))

    node = bn[v]
    net = relevance_prune(bn, [v])
    p, stats = bn_inf(net, [], {v: 1}, order=order)
    stage_stats.append(stats)
    records.append(QueryRecord(f"P({v}=1)", len(net), stats))
    value = p.item() * node.scale - node.offset
    policy = [rules[d] for d in diagram.decision_order]
    return EvaluationResult("shachter-peot", policy, value, stage_stats, queries=records)


# -- comparison harness --------------------------------------------------

@dataclass
class MethodRow:
    method: str
    expected_value: float | None
    multiplications: int = 0
    final_multiplications: int = 0
    max_factor_size: int = 0
    note: str = ""


@dataclass
class TailRow:
    """One tail: reduction queries versus fusion, same conforming order."""

    decision: str
    m: int
    reduction_multiplications: int
    fusion_multiplications: int
    reduction_max_factor_size: int
    fusion_max_factor_size: int

    @property
    def ratio(self) -> float:
        if self.fusion_multiplications == 0:
            return 0.0 if self.reduction_multiplications == 0 else math.inf
        return self.reduction_multiplications / self.fusion_multiplications

    @property
    def bound_holds(self) -> bool:
        return self.reduction_multiplications <= (1 + self.m) * self.fusion_multiplications

    @property
    def size_holds(self) -> bool:
        return self.reduction_max_factor_size <= self.fusion_max_factor_size


@dataclass
class ComparisonReport:
    rows: list[MethodRow]
    tails: list[TailRow]

    @property
    def max_ratio(self) -> float:
        return max((t.ratio for t in self.tails), default=0.0)

    @property
    def bound_holds(self) -> bool:
        return all(t.bound_holds for t in self.tails)

    @property
    def sizes_hold(self) -> bool:
        return all(t.size_holds for t in self.tails)

    @property
    def values_agree(self) -> bool:
        vals = [r.expected_value for r in self.rows if r.expected_value is not None]
        return all(abs(a - vals[0]) <= 1e-8 for a in vals)

    def as_dict(self) -> dict:
        return {
            "methods": [
                {"method": r.method, "expectedValue": r.expected_value,
                 "multiplications": r.multiplications,
                 "finalMultiplications": r.final_multiplications,
                 "maxFactorSize": r.max_factor_size, "note": r.note}
                for r in self.rows
            ],
            "tails": [
                {"decision": t.decision, "m": t.m,
                 "reductionMultiplications": t.reduction_multiplications,
                 "fusionMultiplications": t.fusion_multiplications,
                 "ratio": None if math.isinf(t.ratio) else t.ratio,
                 "reductionMaxFactorSize": t.reduction_max_factor_size,
                 "fusionMaxFactorSize": t.fusion_max_factor_size}
                for t in self.tails
            ],
            "maxRatio": None if math.isinf(self.max_ratio) else self.max_ratio,
            "boundHolds": self.bound_holds,
            "sizesHold": self.sizes_hold,
            "valuesAgree": self.values_agree,
        }


def tail_rows(result: EvaluationResult, order: Sequence[str]) -> list[TailRow]:
    """Re-solve every tail of a traced reduction run by fusion under ``order``."""
    rows = []
    for stage in result.trace:
        mine = merged(stage.queries)
        _, _, fusion = eval_fun1(stage.tail, stage.parts, order)
        theirs = fusion[0].stats
        rows.append(TailRow(stage.decision, len(stage.parts.tail_values),
                            mine.multiplications, theirs.multiplications,
                            mine.max_factor_size, theirs.max_factor_size))
    return rows


def _row(result: EvaluationResult) -> MethodRow:
    total = InferenceStats()
    for s in result.stage_stats:
        total.merge(s)
    return MethodRow(result.method, result.expected_value, total.multiplications,
                     total.final_multiplications, total.max_factor_size)


def compare(diagram: InfluenceDiagram, oracle: bool = False, cap: int = DEFAULT_CAP) -> ComparisonReport:
    order = global_order(diagram)
    reduction = eval_id(diagram, order=order)
    rows = [_row(reduction), _row(eval_id1(diagram, order=order))]
    if len(diagram.value_nodes) == 1:
        rows.append(_row(shachter_peot(diagram, order=order)))
    else:
        rows.append(MethodRow("shachter-peot", None, note="skipped (needs one value node)"))
    if oracle:
        try:
            rows.append(_row(brute_force(diagram, cap)))
        except OracleCapExceeded:
            rows.append(MethodRow("brute-force", None, note="skipped (cap)"))
    return ComparisonReport(rows, tail_rows(reduction, order))


def render_report(report: ComparisonReport) -> str:
    lines = [f"{'method':<15}{'value':>22}{'mults':>10}{'final':>8}{'maxsize':>9}  note"]
    for r in report.rows:
        value = "-" if r.expected_value is None else f"{r.expected_value:.12g}"
        lines.append(f"{r.method:<15}{value:>22}{r.multiplications:>10}"
                     f"{r.final_multiplications:>8}{r.max_factor_size:>9}  {r.note}".rstrip())
    lines.append("")
    lines.append(f"{'tail':<10}{'m':>3}{'reduction':>11}{'fusion':>9}{'ratio':>9}{'1+m':>5}{'sizes':>9}")
    for t in report.tails:
        ratio = "inf" if math.isinf(t.ratio) else f"{t.ratio:.3f}"
        lines.append(f"{t.decision:<10}{t.m:>3}{t.reduction_multiplications:>11}"
                     f"{t.fusion_multiplications:>9}{ratio:>9}{1 + t.m:>5}"
                     f"{t.reduction_max_factor_size:>4}/{t.fusion_max_factor_size}")
    ratio = "inf" if math.isinf(report.max_ratio) else f"{report.max_ratio:.3f}"
    lines.append("")
    lines.append(f"max ratio: {ratio}")
    lines.append(f"(1+m) bound: {'PASS' if report.bound_holds else 'FAIL'}")
    lines.append(f"factor sizes: {'PASS' if report.sizes_hold else 'FAIL'}")
    lines.append(f"values agree: {'PASS' if report.values_agree else 'FAIL'}")
    return "\n".join(lines)
