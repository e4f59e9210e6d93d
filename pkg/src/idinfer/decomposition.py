"""Splitting an influence diagram around its tail decision node.

The tail decision ``d`` partitions the nodes into the upstream set, the
parents of ``d`` and the downstream set (see :func:`partition`).  The
downstream part together with ``d``'s relevant parents forms the *tail*, a
Bayesian network in which ``d``'s optimal rule is computed; the rest forms
the *body*, an influence diagram with one decision fewer.  The body is
augmented with a value node carrying the tail's optimal expected utility
and, when parents of ``d`` depend on downstream nodes, reduced by replacing
those downstream ancestors with conditionals read off the tail marginal.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import factors as fx
from .factors import Factor, Variable
from .model import (
    RANDOM,
    VALUE,
    DiagramError,
    InfluenceDiagram,
    Node,
    ancestral_set,
    descendants,
    moral_graph,
    reachable_avoiding,
    tail_decision_node,
)


@dataclass(frozen=True)
class TailDecomposition:
    """Node sets of a diagram relative to its tail decision node ``d``.

    ``pi1``/``pi2`` split the parents of ``d`` by whether they have a parent
    downstream; ``pi_irrelevant`` are the members of ``pi1`` with no child in
    the tail other than ``d``, and ``pi_relevant`` is everything else.
    """

    d: str
    upstream: tuple[str, ...]
    downstream: tuple[str, ...]
    parents: tuple[str, ...]
    pi1: tuple[str, ...]
    pi2: tuple[str, ...]
    pi_irrelevant: tuple[str, ...]
    pi_relevant: tuple[str, ...]
    tail_values: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "X1": list(self.upstream),
            "X2": list(self.downstream),
            "pi_d": list(self.parents),
            "pi_d1": list(self.pi1),
            "pi_d2": list(self.pi2),
            "pi_di": list(self.pi_irrelevant),
            "pi_dr": list(self.pi_relevant),
            "V2": list(self.tail_values),
        }


def partition(diagram: InfluenceDiagram, d: str) -> TailDecomposition:
    if d != tail_decision_node(diagram):
        raise DiagramError(f"{d!r} is not the tail decision node")
    parents = set(diagram.parents(d))
    x2 = reachable_avoiding(moral_graph(diagram), d, parents)
    x1 = set(diagram) - x2 - parents
    pi2 = {p for p in parents if any(q in x2 for q in diagram.parents(p))}
    pi1 = parents - pi2
    tail_members = (pi2 | x2) - {d}
    pi_i = {p for p in pi1 if not any(c in tail_members for c in diagram.children[p])}
    return TailDecomposition(
        d=d,
        upstream=tuple(sorted(x1)),
        downstream=tuple(sorted(x2)),
        parents=tuple(sorted(parents)),
        pi1=tuple(sorted(pi1)),
        pi2=tuple(sorted(pi2)),
        pi_irrelevant=tuple(sorted(pi_i)),
        pi_relevant=tuple(sorted(parents - pi_i)),
        tail_values=tuple(sorted(x for x in x2 if diagram[x].is_value)),
    )


def proposition_violations(diagram: InfluenceDiagram, parts: TailDecomposition) -> list[str]:
    """Structural properties every tail decomposition must have; returns the broken ones."""
    out = []
    x2 = set(parts.downstream)
    if parts.d not in x2:
        out.append("d not downstream")
    if [x for x in x2 if diagram[x].is_decision] != [parts.d]:
        out.append("downstream set holds another decision")
    if any(not diagram[p].is_random for p in parts.pi2):
        out.append("pi_d2 holds a non-random node")
    if any(not diagram[x].is_random for x in ancestral_set(diagram, parts.pi2) & x2):
        out.append("an(pi_d2) & X2 holds a non-random node")
    others = set(diagram.decision_nodes) - {parts.d}
    if not others <= set(parts.pi1):
        out.append("some other decision is not in pi_d1")
    every = set(parts.upstream) | set(parts.parents) | x2
    if every != set(diagram) or len(parts.upstream) + len(parts.parents) + len(x2) != len(diagram):
        out.append("X1, pi_d, X2 do not partition the nodes")
    if not set(parts.pi_irrelevant) <= set(parts.pi1):
        out.append("irrelevant parents outside pi_d1")
    return out


# -- Cooper's transformation ---------------------------------------------

def cooper_transform(node: Node) -> Node:
    """Turn a value node into a binary random node with ``P(v=1|pa) = (f + K) / M``.

    ``K`` lifts negative utilities to zero; ``M`` is the largest shifted
    utility.  If the shifted table is all zero (``M == 0``) the node gets
    ``P(v=1|pa) = 0`` and contributes ``-K`` to every expectation.
    Expected utilities are recovered as ``P(v=1) * M - K``.
    """
    if not node.is_value:
        raise DiagramError(f"{node.name!r} is not a value node")
    f = node.utility
    low = float(f.values.min()) if f.size else 0.0
    offset = -low if low < 0 else 0.0
    shifted = f.values + offset
    top = float(shifted.max())
    p = shifted / top if top > 0 else np.zeros_like(shifted)
    var = Variable(node.name, 2)
    cpt = Factor(f.scope + (var,), np.stack([1.0 - p, p], axis=-1))
    return Node(node.name, RANDOM, node.parents, var, cpt=cpt, utility=f, scale=top, offset=offset)


def _uniform_root(diagram: InfluenceDiagram, name: str) -> Node:
    var = diagram.variable(name)
    return Node(name, RANDOM, (), var, cpt=fx.uniform(var))


# -- tail ----------------------------------------------------------------

def tail(diagram: InfluenceDiagram, d: str, parts: TailDecomposition | None = None) -> InfluenceDiagram:
    """The Bayesian network over ``pi_d | X2`` in which ``d``'s rule is found."""
    parts = parts or partition(diagram, d)
    nodes = []
    for name in {d, *parts.pi1}:
        nodes.append(_uniform_root(diagram, name))
    for name in parts.pi2:
        nodes.append(diagram[name])
    for name in parts.downstream:
        if name == d:
            continue
        node = diagram[name]
        nodes.append(cooper_transform(node) if node.is_value else node)
    return InfluenceDiagram(nodes)


def red_tail(diagram: InfluenceDiagram, d: str, parts: TailDecomposition | None = None) -> InfluenceDiagram:
    """The tail without the irrelevant parents of ``d`` (isolated nodes there)."""
    parts = parts or partition(diagram, d)
    return tail(diagram, d, parts).without(parts.pi_irrelevant)


# -- body ----------------------------------------------------------------

def body(diagram: InfluenceDiagram, d: str, parts: TailDecomposition | None = None) -> InfluenceDiagram:
    parts = parts or partition(diagram, d)
    keep_downstream = ancestral_set(diagram, parts.pi2)
    return diagram.without(x for x in parts.downstream if x not in keep_downstream)


def _fresh_name(diagram: InfluenceDiagram, base: str) -> str:
    name, i = base, 1
    while name in diagram:
        i += 1
        name = f"{base}_{i}"
    return name


def aug_body(diagram: InfluenceDiagram, d: str, e: Factor,
             parts: TailDecomposition | None = None) -> InfluenceDiagram:
    """Body plus a value node over the relevant parents holding ``max_d e``."""
    parts = parts or partition(diagram, d)
    if set(e.names) != set(parts.pi_relevant) | {d}:
        raise DiagramError(
            f"evaluation functional over {sorted(e.names)} expected {sorted({*parts.pi_relevant, d})}")
    best, _ = fx.max_out(e, d)
    b = body(diagram, d, parts)
    u = Node(_fresh_name(diagram, f"u_{d}"), VALUE, parts.pi_relevant, utility=best)
    return b.with_nodes([u])


# -- reduced body --------------------------------------------------------

def chain_order(diagram: InfluenceDiagram, nodes) -> list[str]:
    """Order ``nodes`` so no node is an ancestor of an earlier one; name order among incomparables."""
    nodes = set(nodes)
    below = {n: descendants(diagram, [n]) & nodes for n in nodes}
    indeg = {n: sum(1 for m in nodes if n in below[m]) for n in nodes}
    ready = [n for n in nodes if indeg[n] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        n = heapq.heappop(ready)
        out.append(n)
        for m in below[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(ready, m)
    return out


def chain_context(tail_bn: InfluenceDiagram, chain: list[str], z: set[str]) -> list[set[str]]:
    """For each prefix ``c_1..c_i`` the members of ``z`` that are its ancestors in the tail."""
    out, seen = [], set()
    for c in chain:
        seen |= ancestral_set(tail_bn, [c])
        out.append(z & seen)
    return out


def chain_conditionals(marginal: Factor, chain: list[str], contexts: list[set[str]],
                       marginalize_context: bool = True) -> list[Factor]:
    """Ratios ``sum_{c_{i+1..k}} P / sum_{c_i..c_k} P`` for each ``c_i`` in ``chain``.

    With ``marginalize_context`` the members of the marginal's remaining
    scope outside ``contexts[i]`` are summed out of both terms, giving a
    table over ``c_1..c_i`` and ``contexts[i]``.  Without it those variables
    stay in scope; the ratio should then be constant along them.
    """
    others = set(marginal.names) - set(chain)
    out = []
    for i, c in enumerate(chain):
        num = fx.sum_out_all(marginal, chain[i + 1:])
        if marginalize_context:
            num = fx.sum_out_all(num, sorted(others - contexts[i]))
        den = fx.sum_out(num, c)
        out.append(fx.divide(num, den))
    return out


def red_body(augmented: InfluenceDiagram, marginal: Factor, tail_bn: InfluenceDiagram,
             parts: TailDecomposition) -> InfluenceDiagram:
    """Replace the downstream ancestors of ``pi_d2`` by conditionals of the tail marginal."""
    if set(marginal.names) != set(parts.pi_relevant):
        raise DiagramError(
            f"marginal over {sorted(marginal.names)} expected {sorted(parts.pi_relevant)}")
    if not parts.pi2:
        return augmented
    drop = ancestral_set(augmented, parts.pi2) & set(parts.downstream)
    chain = chain_order(augmented, parts.pi2)
    z = set(parts.pi_relevant) & set(parts.pi1)
    contexts = chain_context(tail_bn, chain, z)
    tables = chain_conditionals(marginal, chain, contexts)
    new_nodes = []
    for i, (c, table) in enumerate(zip(chain, tables)):
        var = augmented.variable(c)
        values = table.aligned(list(table.names))
        sums = values.sum(axis=table.axis(c), keepdims=True)
        # rows of unreachable contexts come out all-zero; make them a valid distribution
        values = np.where(sums == 0, 1.0 / var.cardinality, values)
        cpt = Factor(table.scope, values)
        new_nodes.append(Node(c, RANDOM, tuple(chain[:i]) + tuple(sorted(contexts[i])), var, cpt=cpt))
    replaced = {n.name for n in new_nodes}
    kept = [n for name, n in augmented.nodes.items() if name not in drop and name not in replaced]
    return InfluenceDiagram(kept + new_nodes)

