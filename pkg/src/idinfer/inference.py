"""Exact Bayesian-network inference by variable elimination.

:func:`bn_inf` is the inference routine every evaluator calls.  It takes an
explicit elimination order or derives one with the min-fill heuristic, and
returns the unnormalized marginal ``P(query, evidence)`` as a factor over
the query together with the operation counts of the call.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from . import factors as fx
from .factors import Factor, InferenceStats
from .model import DiagramError, InfluenceDiagram, ancestral_set, moral_graph

__all__ = [
    "InferenceStats",
    "relevance_prune",
    "elimination_order",
    "conforming_order",
    "bn_inf",
]


def relevance_prune(bn: InfluenceDiagram, targets: Iterable[str]) -> InfluenceDiagram:
    """Restrict ``bn`` to the ancestral set of ``targets``."""
    targets = list(targets)
    for t in targets:
        if t not in bn:
            raise DiagramError(f"unknown target {t!r}")
    return bn.restricted_to(ancestral_set(bn, targets))


def _fill_in(adj: Mapping[str, set[str]], n: str) -> int:
    nbrs = sorted(adj[n])
    return sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:] if b not in adj[a])


def elimination_order(bn: InfluenceDiagram, keep: Iterable[str] = ()) -> list[str]:
    """Greedy min-fill order over the moral graph, covering every node not in ``keep``.

    Ties are broken by node name.  Kept nodes stay in the graph and take
    part in fill-in counts but are never eliminated.
    """
    keep = set(keep)
    adj = {n: set(s) for n, s in moral_graph(bn).items()}
    todo = sorted(n for n in adj if n not in keep)
    order = []
    while todo:
        best = min(todo, key=lambda n: (_fill_in(adj, n), n))
        nbrs = adj.pop(best)
        for a in nbrs:
            adj[a].discard(best)
            adj[a] |= nbrs - {a}
        todo.remove(best)
        order.append(best)
    return order


def conforming_order(order: Sequence[str], required: Iterable[str]) -> list[str]:
    """The subsequence of ``order`` over ``required``; it must cover all of them."""
    required = set(required)
    missing = required.difference(order)
    if missing:
        raise DiagramError(f"elimination order does not cover {sorted(missing)}")
    return [x for x in order if x in required]


def bn_inf(bn: InfluenceDiagram, query: Iterable[str], evidence: Mapping[str, int] | None = None,
           order: Sequence[str] | None = None) -> tuple[Factor, InferenceStats]:
    """Joint ``P(query, evidence)`` of a Bayesian network by variable elimination.

    Evidence is applied by restricting every CPT before elimination, so the
    result is a factor over ``query`` only.  ``order`` may list more nodes
    than need eliminating (e.g. a global order); only the relevant
    subsequence is used.
    """
    query = sorted(set(query))
    evidence = dict(evidence or {})
    if not bn.is_bn:
        raise DiagramError("bn_inf needs a Bayesian network (random nodes only)")
    for q in query:
        if q not in bn:
            raise DiagramError(f"query variable {q!r} not in network")
    for e, value in evidence.items():
        if e not in bn:
            raise DiagramError(f"evidence variable {e!r} not in network")
        card = bn.variable(e).cardinality
        if not 0 <= int(value) < card:
            raise DiagramError(f"evidence {e}={value} out of range (cardinality {card})")
        if e in query:
            raise DiagramError(f"{e!r} is both queried and observed")

    eliminate = set(bn) - set(query) - set(evidence)
    if order is None:
        order = elimination_order(bn, keep=set(query) | set(evidence))
    else:
        order = conforming_order(order, eliminate)

    stats = InferenceStats(calls=1)
    pool: list[Factor] = []
    for f in bn.factors():
        for e, value in evidence.items():
            if e in f:
                f = fx.restrict(f, e, value)
        stats.observe(f)
        pool.append(f)

    for x in order:
        involved = [f for f in pool if x in f]
        if not involved:
            continue
        pool = [f for f in pool if x not in f]
        pool.append(fx.sum_out(fx.product_all(involved, stats), x, stats))

    final = InferenceStats()
    result = fx.product_all(pool, final)
    missing = [bn.variable(q) for q in query if q not in result]
    if missing:
        result = fx.product(result, fx.ones(missing), final)
    stats.absorb_final(final)
    stats.observe(result)
    return result, stats
