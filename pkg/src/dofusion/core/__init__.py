"""Graphs, estimands, the derivation engine and the model oracle."""

from .config import Config, get_config
from .criteria import (
    AdjustmentReport,
    Criterion,
    backdoor_admissible,
    backdoor_estimand,
    enumerate_backdoor_sets,
    frontdoor_admissible,
    frontdoor_estimand,
    s_admissible,
    s_backdoor_admissible,
    s_backdoor_estimand,
    transport_estimand,
)
from .engine import (
    Derivation,
    DeriveResult,
    DeriveStatus,
    SearchBudget,
    derive,
    identify,
    recover,
    transport,
    verify,
)
from .estimand import (
    P,
    ProbTerm,
    Query,
    Source,
    SourceCatalog,
    Var,
    canonicalize,
    estimable,
    render,
)
from .grammar import GrammarError, parse_estimand, parse_term
from .graph import Graph, GraphError, Vertex, VertexKind, format_graph, mutilate, validate
from .oracle import Dist, Scm, evaluate, intervene, joint, random_scm
from .queue import ValidationJob, ValidationQueue
from .rules import RuleName, applicable_rule1, applicable_rule2, applicable_rule3
from .separation import d_separated, implied_independencies

__all__ = [
    # Graphs
    "Graph",
    "GraphError",
    "Vertex",
    "VertexKind",
    "validate",
    "mutilate",
    "format_graph",
    "d_separated",
    "implied_independencies",
    # Estimands
    "P",
    "ProbTerm",
    "Var",
    "Query",
    "Source",
    "SourceCatalog",
    "canonicalize",
    "estimable",
    "render",
    "GrammarError",
    "parse_estimand",
    "parse_term",
    # Criteria
    "AdjustmentReport",
    "Criterion",
    "backdoor_admissible",
    "backdoor_estimand",
    "enumerate_backdoor_sets",
    "frontdoor_admissible",
    "frontdoor_estimand",
    "s_admissible",
    "s_backdoor_admissible",
    "s_backdoor_estimand",
    "transport_estimand",
    # Derivations
    "RuleName",
    "applicable_rule1",
    "applicable_rule2",
    "applicable_rule3",
    "Derivation",
    "DeriveResult",
    "DeriveStatus",
    "SearchBudget",
    "derive",
    "identify",
    "recover",
    "transport",
    "verify",
    # Oracle
    "Dist",
    "Scm",
    "evaluate",
    "intervene",
    "joint",
    "random_scm",
    "ValidationJob",
    "ValidationQueue",
    # Configuration
    "Config",
    "get_config",
]
