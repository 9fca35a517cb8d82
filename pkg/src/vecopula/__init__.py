"""Vector copulas: optimal-transport vector ranks, parametric families and estimation."""

from vecopula._validation import BlockStructure
from vecopula.estimation import (
    FitReport,
    fit_gaussian_vc_mom,
    fit_nesting_copula,
    kendall_transform,
    kendalls_tau_empirical,
)
from vecopula.estimators import (
    ExtremalVectorCopula,
    GaussianVectorCopula,
    KendallTransformer,
    KendallVectorCopula,
    StudentVectorCopula,
)
from vecopula.families import *  # noqa: F403
from vecopula.families import __all__ as _families_all
from vecopula.transport import (
    RankGrid,
    VectorRankAssignment,
    VectorRankTransformer,
    block_vector_ranks,
    brute_force_assignment,
    empirical_vector_ranks,
    make_grid,
    solve_assignment,
    squared_cost_matrix,
    vector_rank_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "BlockStructure",
    "ExtremalVectorCopula",
    "FitReport",
    "GaussianVectorCopula",
    "KendallTransformer",
    "KendallVectorCopula",
    "RankGrid",
    "StudentVectorCopula",
    "VectorRankAssignment",
    "VectorRankTransformer",
    "block_vector_ranks",
    "brute_force_assignment",
    "empirical_vector_ranks",
    "fit_gaussian_vc_mom",
    "fit_nesting_copula",
    "kendall_transform",
    "kendalls_tau_empirical",
    "make_grid",
    "solve_assignment",
    "squared_cost_matrix",
    "vector_rank_assignment",
    *_families_all,
]
