"""Modified fractional hedonic games on weighted graphs."""

from .game import (
    BasicKind,
    CoalitionStructure,
    apply_joint_deviation,
    apply_move,
    classify_basic,
    decompose_to_basic,
    min_degree_sum_edge,
    social_welfare,
    utility,
)
from .graph import (
    WeightedGraph,
    degree_weight,
    format_graph,
    induced_edge_weight,
    max_incident_weight,
    parse_graph,
)
from .stability import (
    DeviationWitness,
    best_response,
    find_blocking_coalition,
    improving_moves,
    is_core,
    is_k_strong,
    is_nash,
    is_strict_core,
)

__all__ = [
    "BasicKind",
    "CoalitionStructure",
    "DeviationWitness",
    "WeightedGraph",
    "apply_joint_deviation",
    "apply_move",
    "best_response",
    "classify_basic",
    "decompose_to_basic",
    "degree_weight",
    "find_blocking_coalition",
    "format_graph",
    "improving_moves",
    "induced_edge_weight",
    "is_core",
    "is_k_strong",
    "is_nash",
    "is_strict_core",
    "max_incident_weight",
    "min_degree_sum_edge",
    "parse_graph",
    "social_welfare",
    "utility",
]

__version__ = "0.1.0"
