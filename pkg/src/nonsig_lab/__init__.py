"""Information-gain vs. disturbance trade-offs from no-signaling and Bell non-locality."""

from nonsig_lab.bell import (
    BellFunctional,
    chain,
    chsh,
    classical_value,
    evaluate,
    generalized_chain,
    rescale,
)
from nonsig_lab.box import (
    Box,
    DisturbanceReport,
    TripartiteBox,
    condition_on_alice,
    correlator,
    disturbance_total,
    make_pr_box,
    marginalize_tripartite,
)
from nonsig_lab.errors import (
    InputError,
    NonsigLabError,
    NumericalError,
    ResourceError,
    SolverError,
    UnsupportedFormError,
    ValidationError,
)
from nonsig_lab.lp import (
    AdversaryResult,
    LpProblem,
    LpSolution,
    min_disturbance_adversary,
    ns_value,
    ns_value_deterministic,
    relevance,
    solve_lp,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryResult",
    "BellFunctional",
    "Box",
    "DisturbanceReport",
    "InputError",
    "LpProblem",
    "LpSolution",
    "NonsigLabError",
    "NumericalError",
    "ResourceError",
    "SolverError",
    "TripartiteBox",
    "UnsupportedFormError",
    "ValidationError",
    "chain",
    "chsh",
    "classical_value",
    "condition_on_alice",
    "correlator",
    "disturbance_total",
    "evaluate",
    "generalized_chain",
    "make_pr_box",
    "marginalize_tripartite",
    "min_disturbance_adversary",
    "ns_value",
    "ns_value_deterministic",
    "relevance",
    "rescale",
    "solve_lp",
]
