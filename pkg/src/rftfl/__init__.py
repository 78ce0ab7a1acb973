"""Approximation algorithms and exact oracles for robust fault-tolerant
uncapacitated facility location."""

from .backup import BackupInstance, BbResult, BackupSolution, algorithm_bb, algorithm_conc_bu, candidate_values, cost_bu
from .backup_alpha import (
    AlphaBbResult,
    algorithm_alpha_bb,
    algorithm_conc_alpha_bu,
    cost_alpha_bu,
    cost_light_alpha_bu,
)
from .costs import (
    Assignment,
    CostBreakdown,
    assign,
    cost_alpha_rftfl,
    cost_rftfl,
    cost_rftfl_assignment_form,
    cost_ufl,
)
from .graph import (
    DistanceMatrix,
    Instance,
    InstanceFormatError,
    all_pairs_distances,
    generate_corpus,
    generate_random_instance,
    generate_tree_instance,
    parse_instance,
    serialize_instance,
)
from .oracle import (
    OracleResult,
    exact_alpha_bb,
    exact_alpha_rftfl,
    exact_bb,
    exact_conc_alpha_bu,
    exact_conc_bu,
    exact_rftfl,
    exact_ufl,
)
from .pipeline import (
    SolveReport,
    Stage1Solver,
    solve_alpha_rftfl,
    solve_rftfl,
    solve_ufl,
    transform_instance,
    ufl_exact,
    ufl_local_search,
)

__version__ = "0.1.0"
