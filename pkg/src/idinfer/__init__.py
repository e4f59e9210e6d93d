"""Influence-diagram evaluation by reduction to Bayesian-network inference."""

from .baselines import ComparisonReport, compare, eval_id1, shachter_peot
from .decomposition import TailDecomposition, cooper_transform, partition
from .documents import ResultDocument, load_diagram, save_diagram
from .evaluator import DecisionRule, EvaluationResult, MethodNotApplicable, eval_id
from .factors import Factor, InferenceStats, Variable
from .inference import bn_inf, elimination_order
from .model import DiagramError, InfluenceDiagram, Node, decision_node, random_node, validate, value_node
from .oracle import brute_force, policy_value

__all__ = [
    "ComparisonReport",
    "DecisionRule",
    "DiagramError",
    "EvaluationResult",
    "Factor",
    "InferenceStats",
    "InfluenceDiagram",
    "MethodNotApplicable",
    "Node",
    "ResultDocument",
    "TailDecomposition",
    "Variable",
    "bn_inf",
    "brute_force",
    "compare",
    "cooper_transform",
    "decision_node",
    "elimination_order",
    "eval_id",
    "eval_id1",
    "load_diagram",
    "partition",
    "policy_value",
    "random_node",
    "save_diagram",
    "shachter_peot",
    "validate",
    "value_node",
]
