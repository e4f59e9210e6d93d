"""JSON documents for networks and evaluation results.

Network document (``"format": "idinfer-network"``)::

    {
      "format": "idinfer-network",
      "version": 1,
      "variables": [{"name": "c", "cardinality": 2, "labels": ["lo", "hi"]}, ...],
      "nodes": [
        {"name": "c", "kind": "random", "parents": [], "table": [0.3, 0.7]},
        {"name": "d", "kind": "decision", "parents": ["c"]},
        {"name": "v", "kind": "value", "parents": ["c", "d"], "table": [1, 0, 0, 1]}
      ]
    }

Every random or decision node needs an entry in ``variables``; value nodes
have none.  Tables are flat and row-major over the node's parents in the
listed order followed, for random nodes, by the node itself (so the node's
own state varies fastest).  Reals are written with Python's shortest
round-trip representation, which reads back to the identical double.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evaluator import EvaluationResult
from .factors import Factor, FactorError, InferenceStats, Variable
from .model import DECISION, KINDS, RANDOM, VALUE, DiagramError, InfluenceDiagram, Node

NETWORK_FORMAT = "idinfer-network"
RESULT_FORMAT = "idinfer-result"
VERSION = 1


class DocumentError(ValueError):
    """A document that cannot be read; the message names the offending field."""


def _dump(data) -> str:
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise DocumentError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise DocumentError(f"{where}: field {key!r} has the wrong type")
    return value


def _check_header(data, fmt: str, source: str) -> None:
    if not isinstance(data, dict):
        raise DocumentError(f"{source}: top level must be an object")
    if data.get("format") != fmt:
        raise DocumentError(f"{source}: field 'format' must be {fmt!r}")
    if data.get("version") != VERSION:
        raise DocumentError(f"{source}: unsupported version {data.get('version')!r}")


def _reals(values, where: str) -> np.ndarray:
    if not isinstance(values, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in values):
        raise DocumentError(f"{where}: field 'table' must be a list of numbers")
    return np.asarray(values, dtype=float)


# -- networks ------------------------------------------------------------

def diagram_from_dict(data, source: str = "<document>") -> InfluenceDiagram:
    _check_header(data, NETWORK_FORMAT, source)
    variables: dict[str, Variable] = {}
    for i, entry in enumerate(_require(data, "variables", list, source)):
        where = f"{source}: variables[{i}]"
        name = _require(entry, "name", str, where)
        card = _require(entry, "cardinality", int, f"{where} ({name})")
        labels = entry.get("labels")
        if name in variables:
            raise DocumentError(f"{where}: duplicate variable {name!r}")
        try:
            variables[name] = Variable(name, card, tuple(labels) if labels is not None else None)
        except (FactorError, TypeError) as exc:
            raise DocumentError(f"{where}: {exc}") from None

    entries = _require(data, "nodes", list, source)
    value_names = {e.get("name") for e in entries if isinstance(e, dict) and e.get("kind") == VALUE}
    nodes = []
    for i, entry in enumerate(entries):
        name = _require(entry, "name", str, f"{source}: nodes[{i}]")
        where = f"{source}: node {name!r}"
        kind = _require(entry, "kind", str, where)
        if kind not in KINDS:
            raise DocumentError(f"{where}: field 'kind' must be one of {', '.join(KINDS)}")
        parents = _require(entry, "parents", list, where)
        if not all(isinstance(p, str) for p in parents):
            raise DocumentError(f"{where}: field 'parents' must list names")
        for p in parents:
            # a value parent of a decision is a constraint violation, reported by validation
            if p not in variables and not (kind == DECISION and p in value_names):
                raise DocumentError(f"{where}: parent {p!r} is not a declared variable")
        pvars = tuple(variables[p] for p in parents if p in variables)
        try:
            if kind == VALUE:
                if name in variables:
                    raise DocumentError(f"{where}: value nodes take no entry in 'variables'")
                table = _reals(_require(entry, "table", list, where), where)
                expected = int(np.prod([v.cardinality for v in pvars], dtype=np.int64))
                if table.size != expected:
                    raise DocumentError(f"{where}: table has {table.size} entries, expected {expected}")
                nodes.append(Node(name, VALUE, parents, utility=Factor(pvars, table)))
                continue
            if name not in variables:
                raise DocumentError(f"{where}: no entry in 'variables'")
            var = variables[name]
            if kind == DECISION:
                if "table" in entry:
                    raise DocumentError(f"{where}: decision nodes take no table")
                nodes.append(Node(name, DECISION, parents, var))
                continue
            table = _reals(_require(entry, "table", list, where), where)
            expected = int(np.prod([v.cardinality for v in pvars], dtype=np.int64)) * var.cardinality
            if table.size != expected:
                raise DocumentError(f"{where}: table has {table.size} entries, expected {expected}")
            nodes.append(Node(name, RANDOM, parents, var, cpt=Factor(pvars + (var,), table)))
        except (DiagramError, FactorError) as exc:
            raise DocumentError(f"{where}: {exc}") from None
    try:
        return InfluenceDiagram(nodes)
    except DiagramError as exc:
        raise DocumentError(f"{source}: {exc}") from None


def diagram_to_dict(diagram: InfluenceDiagram) -> dict:
    variables, nodes = [], []
    try:
        order = diagram.topological_order
    except DiagramError:
        order = tuple(diagram)
    for name in order:
        node = diagram[name]
        if node.variable is not None:
            entry = {"name": name, "cardinality": node.variable.cardinality}
            if node.variable.labels is not None:
                entry["labels"] = list(node.variable.labels)
            variables.append(entry)
        entry = {"name": name, "kind": node.kind, "parents": list(node.parents)}
        if node.is_random:
            entry["table"] = node.cpt.aligned([*node.parents, name]).ravel().tolist()
        elif node.is_value:
            entry["table"] = node.utility.aligned(list(node.parents)).ravel().tolist()
        nodes.append(entry)
    return {"format": NETWORK_FORMAT, "version": VERSION, "variables": variables, "nodes": nodes}


def loads_diagram(text: str, source: str = "<document>") -> InfluenceDiagram:
    return diagram_from_dict(_parse_json(text, source), source)


def dumps_diagram(diagram: InfluenceDiagram) -> str:
    return _dump(diagram_to_dict(diagram))


def load_diagram(path) -> InfluenceDiagram:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None
    return loads_diagram(text, str(path))


def save_diagram(diagram: InfluenceDiagram, path) -> None:
    Path(path).write_text(dumps_diagram(diagram))


# -- results -------------------------------------------------------------

@dataclass
class RuleEntry:
    decision: str
    scope: list[str]
    table: list[int]


@dataclass
class ResultDocument:
    method: str
    expected_value: float
    policy: list[RuleEntry] = field(default_factory=list)
    stats: list[InferenceStats] = field(default_factory=list)

    @classmethod
    def from_result(cls, result: EvaluationResult) -> "ResultDocument":
        policy = [RuleEntry(r.decision.name, list(r.names), r.flat()) for r in result.policy]
        return cls(result.method, float(result.expected_value), policy,
                   [InferenceStats(**vars(s)) for s in result.stage_stats])

    def to_dict(self) -> dict:
        return {
            "format": RESULT_FORMAT,
            "version": VERSION,
            "method": self.method,
            "expectedValue": self.expected_value,
            "policy": [{"decision": r.decision, "scope": r.scope, "table": r.table} for r in self.policy],
            "stats": [s.as_dict() for s in self.stats],
        }

    @classmethod
    def from_dict(cls, data, source: str = "<result>") -> "ResultDocument":
        _check_header(data, RESULT_FORMAT, source)
        method = _require(data, "method", str, source)
        value = _require(data, "expectedValue", (int, float), source)
        policy = []
        for i, entry in enumerate(_require(data, "policy", list, source)):
            where = f"{source}: policy[{i}]"
            decision = _require(entry, "decision", str, where)
            scope = _require(entry, "scope", list, where)
            table = _require(entry, "table", list, where)
            if not all(isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in table):
                raise DocumentError(f"{where}: field 'table' must list action indices")
            policy.append(RuleEntry(decision, list(scope), list(table)))
        stats = [InferenceStats.from_dict(s) for s in _require(data, "stats", list, source)]
        return cls(method, float(value), policy, stats)

    def dumps(self) -> str:
        return _dump(self.to_dict())

    @classmethod
    def loads(cls, text: str, source: str = "<result>") -> "ResultDocument":
        return cls.from_dict(_parse_json(text, source), source)
