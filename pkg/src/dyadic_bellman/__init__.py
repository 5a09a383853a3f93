"""Lower-bound laboratory for the dyadic maximal operator on homogeneous trees."""
from . import bellman_forms, extremizers, infimum_oracle, tree_lab
from .bellman_forms import (
    BellmanQuery,
    blq_lower,
    bpq_chain_value,
    bpq_lower,
    bq_less_p,
    c_np,
    dp_min_form,
    dp_piecewise,
    g_of_u,
    h_convex_test,
    kappa0,
    lp_lower,
    ratio_const,
    u_star,
    weak_lower,
)
from .errors import DomainError, InfeasibleError, ProjectionError
from .extremizers import (
    ExtremizerReport,
    chain_function,
    chain_profile,
    concentrated_function,
    dp_near_extremizer,
    verify_bounds,
)
from .infimum_oracle import (
    ObjectiveSpec,
    SandwichResult,
    evaluate_objective,
    exhaustive_search,
    feasible_project,
    local_search,
    sandwich,
)
from .tree_lab import (
    CellIndex,
    LayerCake,
    MaximalDecomposition,
    StepFunction,
    TreeParams,
    cell_average,
    condexp,
    distribution,
    integral,
    integral_power,
    maximal,
    select_threshold,
    stopping_decomposition,
    top_measure_integral,
    weak_norm,
)

__version__ = "0.1.0"

__all__ = [
    "bellman_forms",
    "extremizers",
    "infimum_oracle",
    "tree_lab",
    "DomainError",
    "InfeasibleError",
    "ProjectionError",
    "BellmanQuery",
    "blq_lower",
    "bpq_chain_value",
    "bpq_lower",
    "bq_less_p",
    "c_np",
    "dp_min_form",
    "dp_piecewise",
    "g_of_u",
    "h_convex_test",
    "kappa0",
    "lp_lower",
    "ratio_const",
    "u_star",
    "weak_lower",
    "ExtremizerReport",
    "chain_function",
    "chain_profile",
    "concentrated_function",
    "dp_near_extremizer",
    "verify_bounds",
    "ObjectiveSpec",
    "SandwichResult",
    "evaluate_objective",
    "exhaustive_search",
    "feasible_project",
    "local_search",
    "sandwich",
    "CellIndex",
    "LayerCake",
    "MaximalDecomposition",
    "StepFunction",
    "TreeParams",
    "cell_average",
    "condexp",
    "distribution",
    "integral",
    "integral_power",
    "maximal",
    "select_threshold",
    "stopping_decomposition",
    "top_measure_integral",
    "weak_norm",
]
