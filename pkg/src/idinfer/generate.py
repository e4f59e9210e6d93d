"""Seeded random influence diagrams and Bayesian networks for property tests.

Diagrams are built in one topological sweep, so they are acyclic by
construction.  Every decision takes the previous decision and its parents as
parents, which makes the result regular and no-forgetting.  Instances whose
policy space or joint state space exceeds the caps are redrawn, keeping the
suite small enough for exhaustive policy enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .factors import Variable
from .model import InfluenceDiagram, decision_node, random_node, value_node
from .oracle import policy_space


@dataclass(frozen=True)
class SuiteConfig:
    max_decisions: int = 4
    max_chance: int = 8
    max_values: int = 3
    max_card: int = 3
    max_chance_parents: int = 2
    max_value_parents: int = 3
    deterministic_rows: float = 0.15
    policy_cap: int = 100_000
    joint_cap: int = 50_000
    attempts: int = 200


def random_cpt(rng: np.random.Generator, shape: tuple[int, ...], deterministic: float = 0.0) -> np.ndarray:
    """Rows along the last axis are Dirichlet(1) draws, some replaced by point masses."""
    rows = int(np.prod(shape[:-1], dtype=np.int64))
    card = shape[-1]
    table = rng.dirichlet(np.ones(card), size=rows)
    hard = rng.random(rows) < deterministic
    if hard.any():
        table[hard] = np.eye(card)[rng.integers(card, size=int(hard.sum()))]
    return table.reshape(shape)


def random_utility(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    if rng.random() < 0.1:
        return np.full(shape, rng.uniform(-10, 10))
    return rng.uniform(-10, 10, size=shape)


def _subset(rng: np.random.Generator, pool: list[str], most: int) -> list[str]:
    if not pool or most <= 0:
        return []
    size = int(rng.integers(0, min(most, len(pool)) + 1))
    picked = rng.choice(len(pool), size=size, replace=False)
    return [pool[i] for i in sorted(picked)]


def _draw_diagram(rng: np.random.Generator, cfg: SuiteConfig) -> InfluenceDiagram:
    k = int(rng.integers(0, cfg.max_decisions + 1))
    n = int(rng.integers(1, cfg.max_chance + 1))
    m = int(rng.integers(1, cfg.max_values + 1))

    # interleave decisions among chance nodes, keeping their relative order
    slots = sorted(rng.choice(n + k, size=k, replace=False).tolist())
    sequence, ci, di = [], 0, 0
    for pos in range(n + k):
        if di < k and pos == slots[di]:
            di += 1
            sequence.append(f"d{di}")
        else:
            ci += 1
            sequence.append(f"c{ci}")

    variables: dict[str, Variable] = {}
    nodes = []
    earlier: list[str] = []
    previous: list[str] = []  # previous decision together with its parents
    dparents: dict[str, list[str]] = {}
    for name in sequence:
        if name.startswith("d"):
            card = int(rng.integers(2, cfg.max_card + 1)) if rng.random() < 0.3 else 2
            variables[name] = Variable(name, card)
            chance = [e for e in earlier if e.startswith("c") and e not in previous]
            extra = 2 if di <= 2 else 1
            parents = sorted(set(previous) | set(_subset(rng, chance, extra)))
            nodes.append(decision_node(variables[name], parents))
            dparents[name] = parents
            previous = parents + [name]
        else:
            card = int(rng.integers(2, cfg.max_card + 1))
            variables[name] = Variable(name, card)
            parents = _subset(rng, earlier, cfg.max_chance_parents)
            pvars = [variables[p] for p in parents]
            shape = tuple(v.cardinality for v in pvars) + (card,)
            nodes.append(random_node(variables[name], pvars, random_cpt(rng, shape, cfg.deterministic_rows)))
        earlier.append(name)

    for j in range(1, m + 1):
        # value nodes favour the later part of the sequence
        weights = np.arange(1, len(earlier) + 1, dtype=float)
        size = int(rng.integers(1, min(cfg.max_value_parents, len(earlier)) + 1))
        picked = rng.choice(len(earlier), size=size, replace=False, p=weights / weights.sum())
        parents = [earlier[i] for i in sorted(picked)]
        if k and rng.random() < 0.4:
            # tie a downstream utility to an ancestor of the last decision's parents
            last = f"d{k}"
            ancestors = {p for node in nodes if node.name in dparents[last] for p in node.parents}
            candidates = sorted(ancestors - set(dparents[last]) - {last})
            if candidates:
                parents = sorted({last, candidates[int(rng.integers(len(candidates)))]})
        pvars = [variables[p] for p in parents]
        shape = tuple(v.cardinality for v in pvars)
        nodes.append(value_node(f"v{j}", pvars, random_utility(rng, shape)))
    return InfluenceDiagram(nodes)


def joint_size(diagram: InfluenceDiagram) -> int:
    return int(np.prod([diagram.variable(n).cardinality for n in diagram if not diagram[n].is_value],
                       dtype=np.int64))


def random_diagram(rng: np.random.Generator, cfg: SuiteConfig = SuiteConfig()) -> InfluenceDiagram:
    """A valid random diagram within the configured caps."""
    for _ in range(cfg.attempts):
        diagram = _draw_diagram(rng, cfg)
        if policy_space(diagram) <= cfg.policy_cap and joint_size(diagram) <= cfg.joint_cap:
            return diagram
    raise RuntimeError("no diagram within caps; loosen the configuration")


def suite(seed: int, count: int, cfg: SuiteConfig = SuiteConfig()) -> Iterator[InfluenceDiagram]:
    """``count`` diagrams; instance ``i`` depends only on ``(seed, i)``."""
    for i in range(count):
        yield random_diagram(np.random.default_rng([seed, i]), cfg)


def random_bn(rng: np.random.Generator, n: int, max_card: int = 3, max_parents: int = 3,
              deterministic: float = 0.1) -> InfluenceDiagram:
    """A random Bayesian network on ``n`` nodes named ``x0..x{n-1}`` in topological order."""
    variables = [Variable(f"x{i}", int(rng.integers(2, max_card + 1))) for i in range(n)]
    nodes = []
    for i, var in enumerate(variables):
        parents = _subset(rng, [v.name for v in variables[:i]], max_parents)
        pvars = [variables[int(p[1:])] for p in parents]
        shape = tuple(v.cardinality for v in pvars) + (var.cardinality,)
        nodes.append(random_node(var, pvars, random_cpt(rng, shape, deterministic)))
    return InfluenceDiagram(nodes)
