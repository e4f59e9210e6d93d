"""Influence diagrams, Bayesian networks and value networks.

One immutable :class:`InfluenceDiagram` type covers all three: a Bayesian
network is a diagram whose nodes are all random, a value network has no
decision nodes.  Structural queries (moral graph, m-separation, ancestral
sets, barren nodes) are module-level functions.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .factors import Factor, Variable

RANDOM = "random"
DECISION = "decision"
VALUE = "value"
KINDS = (RANDOM, DECISION, VALUE)

NORMALIZATION_TOL = 1e-9


class DiagramError(ValueError):
    """Raised for malformed diagrams or invalid structural requests."""


@dataclass(frozen=True)
class Node:
    """A node of an influence diagram.

    Random nodes carry ``cpt`` over ``{variable} | parents``.  Value nodes
    carry a signed ``utility`` over their parents and no variable.  A value
    node turned into a binary random node (see
    :func:`idinfer.decomposition.cooper_transform`) keeps ``utility`` together
    with its ``scale`` and ``offset`` so expected utilities can be recovered.
    """

    name: str
    kind: str
    parents: tuple[str, ...] = ()
    variable: Variable | None = None
    cpt: Factor | None = None
    utility: Factor | None = None
    scale: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        if self.kind not in KINDS:
            raise DiagramError(f"node {self.name!r}: unknown kind {self.kind!r}")
        if len(set(self.parents)) != len(self.parents):
            raise DiagramError(f"node {self.name!r}: repeated parent")
        if self.name in self.parents:
            raise DiagramError(f"node {self.name!r} is its own parent")
        if self.kind == VALUE:
            if self.variable is not None or self.cpt is not None:
                raise DiagramError(f"value node {self.name!r} has no frame or CPT")
            if self.utility is None:
                raise DiagramError(f"value node {self.name!r} needs a utility table")
            if set(self.utility.names) != set(self.parents):
                raise DiagramError(
                    f"value node {self.name!r}: utility scope {sorted(self.utility.names)} "
                    f"!= parents {sorted(self.parents)}")
            return
        if self.variable is None or self.variable.name != self.name:
            raise DiagramError(f"node {self.name!r} needs a variable of the same name")
        if self.kind == DECISION:
            if self.cpt is not None:
                raise DiagramError(f"decision node {self.name!r} carries no table")
            return
        if self.cpt is None:
            raise DiagramError(f"random node {self.name!r} needs a CPT")
        if set(self.cpt.names) != {self.name, *self.parents}:
            raise DiagramError(
                f"random node {self.name!r}: CPT scope {sorted(self.cpt.names)} "
                f"!= node and parents {sorted({self.name, *self.parents})}")

    @property
    def is_random(self) -> bool:
        return self.kind == RANDOM

    @property
    def is_decision(self) -> bool:
        return self.kind == DECISION

    @property
    def is_value(self) -> bool:
        return self.kind == VALUE

    @property
    def is_converted_value(self) -> bool:
        return self.kind == RANDOM and self.utility is not None


def random_node(variable: Variable, parents: Iterable[Variable], table) -> Node:
    """Random node from a table laid out as ``parents..., node`` row-major."""
    parents = tuple(parents)
    return Node(variable.name, RANDOM, tuple(p.name for p in parents), variable,
                cpt=Factor(parents + (variable,), table))


def decision_node(variable: Variable, parents: Iterable[str] = ()) -> Node:
    return Node(variable.name, DECISION, tuple(parents), variable)


def value_node(name: str, parents: Iterable[Variable], table) -> Node:
    """Value node from a utility table laid out row-major over ``parents``."""
    parents = tuple(parents)
    return Node(name, VALUE, tuple(p.name for p in parents), utility=Factor(parents, table))


class InfluenceDiagram:
    """An immutable DAG of random, decision and value nodes."""

    def __init__(self, nodes: Iterable[Node]):
        table: dict[str, Node] = {}
        for node in nodes:
            if node.name in table:
                raise DiagramError(f"duplicate node {node.name!r}")
            table[node.name] = node
        for node in table.values():
            for p in node.parents:
                if p not in table:
                    raise DiagramError(f"node {node.name!r}: unknown parent {p!r}")
        self._nodes = MappingProxyType(dict(sorted(table.items())))

    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    def __getitem__(self, name: str) -> Node:
        return self._nodes[name]

    def __contains__(self, name) -> bool:
        return name in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self):
        return iter(self._nodes)

    def __repr__(self):
        kinds = {k: sum(1 for n in self._nodes.values() if n.kind == k) for k in KINDS}
        return f"InfluenceDiagram({kinds[RANDOM]} random, {kinds[DECISION]} decision, {kinds[VALUE]} value)"

    @cached_property
    def children(self) -> Mapping[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {n: [] for n in self._nodes}
        for node in self._nodes.values():
            for p in node.parents:
                kids[p].append(node.name)
        return MappingProxyType({n: tuple(sorted(c)) for n, c in kids.items()})

    def parents(self, name: str) -> tuple[str, ...]:
        return self._nodes[name].parents

    def variable(self, name: str) -> Variable:
        var = self._nodes[name].variable
        if var is None:
            raise DiagramError(f"value node {name!r} has no frame")
        return var

    def names_of(self, kind: str) -> list[str]:
        return [n for n, node in self._nodes.items() if node.kind == kind]

    @property
    def random_nodes(self) -> list[str]:
        return self.names_of(RANDOM)

    @property
    def decision_nodes(self) -> list[str]:
        return self.names_of(DECISION)

    @property
    def value_nodes(self) -> list[str]:
        return self.names_of(VALUE)

    @property
    def is_bn(self) -> bool:
        return all(node.is_random for node in self._nodes.values())

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Kahn's order, lexicographic among ready nodes; raises on cycles."""
        indeg = {n: len(node.parents) for n, node in self._nodes.items()}
        ready = [n for n, k in indeg.items() if k == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            n = heapq.heappop(ready)
            order.append(n)
            for c in self.children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self._nodes):
            raise DiagramError("diagram has a directed cycle")
        return tuple(order)

    @cached_property
    def decision_order(self) -> tuple[str, ...]:
        """Decisions d_1..d_k ordered along the directed path through them."""
        decisions = self.decision_nodes
        desc = {d: descendants(self, [d]) for d in decisions}
        ordered = sorted(decisions, key=lambda d: -sum(1 for e in decisions if e in desc[d]))
        for a, b in zip(ordered, ordered[1:]):
            if b not in desc[a]:
                raise DiagramError(f"decisions {a!r} and {b!r} are not ordered (not regular)")
        return tuple(ordered)

    # -- derivation helpers; all return new diagrams ------------------------

    def without(self, names: Iterable[str]) -> "InfluenceDiagram":
        drop = set(names)
        return InfluenceDiagram(n for name, n in self._nodes.items() if name not in drop)

    def restricted_to(self, names: Iterable[str]) -> "InfluenceDiagram":
        keep = set(names)
        return InfluenceDiagram(n for name, n in self._nodes.items() if name in keep)

    def with_nodes(self, nodes: Iterable[Node]) -> "InfluenceDiagram":
        """Add new nodes or replace existing ones of the same name."""
        table = dict(self._nodes)
        for node in nodes:
            table[node.name] = node
        return InfluenceDiagram(table.values())

    def factors(self) -> list[Factor]:
        """CPTs of all random nodes, in name order."""
        return [n.cpt for n in self._nodes.values() if n.is_random]


# -- graph queries ---------------------------------------------------------

def ancestral_set(diagram: InfluenceDiagram, nodes: Iterable[str]) -> set[str]:
    """The given nodes together with all their ancestors."""
    result: set[str] = set()
    stack = list(nodes)
    while stack:
        n = stack.pop()
        if n in result:
            continue
        if n not in diagram:
            raise DiagramError(f"unknown node {n!r}")
        result.add(n)
        stack.extend(diagram.parents(n))
    return result


def descendants(diagram: InfluenceDiagram, nodes: Iterable[str]) -> set[str]:
    """Strict descendants of ``nodes`` (excluding the nodes themselves unless reachable)."""
    result: set[str] = set()
    stack = [c for n in nodes for c in diagram.children[n]]
    while stack:
        n = stack.pop()
        if n not in result:
            result.add(n)
            stack.extend(diagram.children[n])
    return result


def moral_graph(diagram: InfluenceDiagram) -> dict[str, set[str]]:
    """Undirected adjacency: drop arc directions and marry co-parents."""
    adj: dict[str, set[str]] = {n: set() for n in diagram}
    for node in diagram.nodes.values():
        ps = node.parents
        for p in ps:
            adj[p].add(node.name)
            adj[node.name].add(p)
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def reachable_avoiding(adj: Mapping[str, set[str]], start: str, blocked: Iterable[str]) -> set[str]:
    """Nodes connected to ``start`` by paths that avoid ``blocked``."""
    blocked = set(blocked)
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m in adj[n]:
            if m not in seen and m not in blocked:
                seen.add(m)
                stack.append(m)
    return seen


def m_separated(diagram: InfluenceDiagram, separator: Iterable[str], x: str, y: str) -> bool:
    """Whether every moral-graph path between ``x`` and ``y`` meets ``separator``."""
    separator = set(separator)
    if x in separator or y in separator or x == y:
        raise DiagramError("x and y must be distinct and outside the separator")
    return y not in reachable_avoiding(moral_graph(diagram), x, separator)


def tail_decision_node(diagram: InfluenceDiagram) -> str:
    """The decision node with no other decision among its descendants."""
    problems = validate(diagram)
    if problems:
        raise DiagramError(f"invalid diagram: {problems[0].message}")
    order = diagram.decision_order
    if not order:
        raise DiagramError("diagram has no decision nodes")
    return order[-1]


def prune_barren(diagram: InfluenceDiagram, keep: Iterable[str] = ()) -> InfluenceDiagram:
    """Repeatedly remove childless random nodes not listed in ``keep``."""
    keep = set(keep)
    current = diagram
    while True:
        barren = [n for n in current.random_nodes
                  if not current.children[n] and n not in keep]
        if not barren:
            return current
        current = current.without(barren)


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    nodes: tuple[str, ...]
    message: str

    def __str__(self):
        return self.message


def _has_cycle(diagram: InfluenceDiagram) -> list[str]:
    try:
        diagram.topological_order
    except DiagramError:
        return sorted(n for n in diagram if n in descendants(diagram, [n]))
    return []


def validate(diagram: InfluenceDiagram) -> list[Violation]:
    """All constraint violations of ``diagram``; an empty list means valid."""
    out: list[Violation] = []
    cyclic = _has_cycle(diagram)
    if cyclic:
        out.append(Violation("cycle", tuple(cyclic), f"directed cycle through {', '.join(cyclic)}"))
    for v in diagram.value_nodes:
        for c in diagram.children[v]:
            out.append(Violation("value-with-child", (v, c), f"value node has child {v}->{c}"))
    for name, node in diagram.nodes.items():
        if node.is_random:
            sums = node.cpt.values.sum(axis=node.cpt.axis(name))
            if np.any(node.cpt.values < 0) or np.any(np.abs(sums - 1.0) > NORMALIZATION_TOL):
                out.append(Violation("unnormalized", (name,), f"CPT of {name} is not normalized"))
    if cyclic:
        return out
    decisions = diagram.decision_nodes
    desc = {d: descendants(diagram, [d]) for d in decisions}
    for i, a in enumerate(decisions):
        for b in decisions[i + 1:]:
            if b not in desc[a] and a not in desc[b]:
                out.append(Violation("irregular", (a, b),
                                     f"not regular: no directed path between {a} and {b}"))
    if any(v.kind == "irregular" for v in out):
        return out
    order = diagram.decision_order
    for i, a in enumerate(order):
        required = {a, *diagram.parents(a)}
        for b in order[i + 1:]:
            missing = sorted(required - set(diagram.parents(b)))
            if missing:
                out.append(Violation("forgetting", (b, *missing),
                                     f"no-forgetting: {b} lacks parents {', '.join(missing)}"))
    return out
