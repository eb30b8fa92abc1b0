from nonsig_lab.lp.polytope import (
    AdversaryResult,
    min_disturbance_adversary,
    ns_box_optimum,
    ns_value,
    ns_value_deterministic,
    relevance,
)
from nonsig_lab.lp.simplex import LpProblem, LpSolution, solve_lp

__all__ = [
    "AdversaryResult",
    "LpProblem",
    "LpSolution",
    "min_disturbance_adversary",
    "ns_box_optimum",
    "ns_value",
    "ns_value_deterministic",
    "relevance",
    "solve_lp",
]
