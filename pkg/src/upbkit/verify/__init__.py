"""Checks for orthogonality, completeness, unextendibility and strong nonlocality."""

from .basis import (
    CompletenessReport,
    OrthogonalityReport,
    ProductWitness,
    check_completeness,
    check_orthogonality,
    complement_projector,
    completeness_witness,
    overlap_matrix,
    product_witness,
)
from .lemmas import LemmaHypothesisError, block_trivial_verify, block_zeros_verify
from .locc import GreedyResult, GreedySearch, greedy_locc_distinguishable, identify
from .nonlocality import (
    ConstraintSystem,
    NonlocalityReport,
    all_certified,
    bipartite_cuts,
    brute_force_solution_dim,
    check_strong_nonlocality,
    op_constraints,
    solve_triviality,
)
from .seesaw import SeesawConfig, SeesawResult, seesaw_product_overlap

__all__ = [
    "CompletenessReport",
    "ConstraintSystem",
    "GreedyResult",
    "GreedySearch",
    "LemmaHypothesisError",
    "NonlocalityReport",
    "OrthogonalityReport",
    "ProductWitness",
    "SeesawConfig",
    "SeesawResult",
    "all_certified",
    "bipartite_cuts",
    "block_trivial_verify",
    "block_zeros_verify",
    "brute_force_solution_dim",
    "check_completeness",
    "check_orthogonality",
    "check_strong_nonlocality",
    "complement_projector",
    "completeness_witness",
    "greedy_locc_distinguishable",
    "identify",
    "op_constraints",
    "overlap_matrix",
    "product_witness",
    "seesaw_product_overlap",
    "solve_triviality",
]
