"""Command-line front end.

Exit codes: 0 success, 1 the diagram violates a constraint, 2 the file
cannot be read or parsed, 3 the chosen method does not apply.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import compare, eval_id1, render_report, shachter_peot
from .decomposition import partition
from .documents import DocumentError, ResultDocument, dumps_diagram, load_diagram
from .evaluator import EvaluationResult, MethodNotApplicable, eval_id
from .generate import SuiteConfig, random_diagram
from .model import DiagramError, InfluenceDiagram, validate
from .oracle import DEFAULT_CAP, OracleCapExceeded, brute_force

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_METHOD = 0, 1, 2, 3

METHODS = ("reduction", "fusion", "shachter-peot", "brute-force")


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str) -> InfluenceDiagram:
    try:
        return load_diagram(path)
    except DocumentError as exc:
        raise _Exit(EXIT_PARSE, f"parse error: {exc}") from None


def _load_valid(path: str) -> InfluenceDiagram:
    diagram = _load(path)
    problems = validate(diagram)
    if problems:
        raise _Exit(EXIT_INVALID, "\n".join(p.message for p in problems))
    return diagram


def _braces(names) -> str:
    return "{" + ", ".join(names) + "}"


# -- commands ------------------------------------------------------------

def cmd_validate(args) -> int:
    diagram = _load(args.path)
    problems = validate(diagram)
    for p in problems:
        print(p.message)
    return EXIT_INVALID if problems else EXIT_OK


def cmd_decompose(args) -> int:
    diagram = _load_valid(args.path)
    if not diagram.decision_nodes:
        raise _Exit(EXIT_INVALID, "diagram has no decision nodes")
    parts = partition(diagram, diagram.decision_order[-1])
    if args.json:
        print(json.dumps(parts.as_dict(), indent=2))
        return EXIT_OK
    print(f"d = {parts.d}")
    print(f"X1 = {_braces(parts.upstream)}")
    print(f"X2 = {_braces(parts.downstream)}")
    print(f"pi_d = {_braces(parts.parents)}")
    print(f"pi_d,1 = {_braces(parts.pi1)}")
    print(f"pi_d,2 = {_braces(parts.pi2)}")
    print(f"pi_d,i = {_braces(parts.pi_irrelevant)}")
    print(f"pi_d,r = {_braces(parts.pi_relevant)}")
    print(f"V2 = {_braces(parts.tail_values)}")
    return EXIT_OK


def run_method(diagram: InfluenceDiagram, method: str, conform: bool = False,
               cap: int = DEFAULT_CAP) -> EvaluationResult:
    if method == "reduction":
        return eval_id(diagram, conform=conform)
    if method == "fusion":
        return eval_id1(diagram)
    if method == "shachter-peot":
        return shachter_peot(diagram)
    if method == "brute-force":
        return brute_force(diagram, cap)
    raise ValueError(f"unknown method {method!r}")


def render_result(result: EvaluationResult) -> str:
    lines = [f"method: {result.method}", f"expected value: {result.expected_value!r}"]
    for rule in result.policy:
        dvar = rule.decision
        lines.append(f"rule {dvar.name} over {_braces(rule.names)}:")
        cards = [range(v.cardinality) for v in rule.scope]
        for config, action in zip(itertools.product(*cards), rule.flat()):
            context = ", ".join(f"{v.name}={v.label(i)}" for v, i in zip(rule.scope, config))
            lines.append(f"  {context or '(always)'} -> {dvar.name}={dvar.label(action)}")
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    diagram = _load_valid(args.path)
    try:
        result = run_method(diagram, args.method, args.order_conform, args.cap)
    except (MethodNotApplicable, OracleCapExceeded) as exc:
        raise _Exit(EXIT_METHOD, f"{args.method}: {exc}") from None
    print(render_result(result))
    if args.out:
        Path(args.out).write_text(ResultDocument.from_result(result).dumps())
    return EXIT_OK


def cmd_compare(args) -> int:
    diagram = _load_valid(args.path)
    report = compare(diagram, oracle=args.oracle, cap=args.cap)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(render_report(report))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = SuiteConfig(max_decisions=args.decisions, max_chance=args.chance,
                      max_values=args.values, max_card=args.max_card)
    text = dumps_diagram(random_diagram(np.random.default_rng(args.seed), cfg))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idinfer", description="Evaluate influence diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the structural and numeric constraints")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", help="print the node sets around the tail decision")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("evaluate", help="optimal policy and expected value")
    p.add_argument("path")
    p.add_argument("--method", choices=METHODS, default="reduction")
    p.add_argument("--out", help="write the result document here")
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for scripting symmetry; every method is deterministic")
    p.add_argument("--order-conform", action="store_true",
                   help="derive every elimination order from one global order")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="brute-force enumeration cap")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run every method and check the operation-count bound")
    p.add_argument("path")
    p.add_argument("--oracle", action="store_true", help="include brute-force enumeration")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="write a random valid diagram")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--decisions", type=int, default=4)
    p.add_argument("--chance", type=int, default=8)
    p.add_argument("--values", type=int, default=3)
    p.add_argument("--max-card", type=int, default=3)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except DiagramError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
