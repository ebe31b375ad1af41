"""Reassignment mechanisms under a mandatory complete-exchange constraint.

Every division gives up its own worker and receives somebody else's, so
feasible outcomes are derangements.  The package bundles the mechanisms,
a linear-time assignment-partition constructor, a brute-force property
verifier, and deterministic reproduction reports, all behind one CLI.
"""

from .model import (
    Assignment,
    AssignmentPartition,
    EnumerationBoundExceeded,
    FinalOrder,
    Infeasible,
    MalformedProblem,
    MechanismId,
    PartitionGroup,
    PreferenceProfile,
    Problem,
    Trace,
    TraceStep,
    complete_partial_profile,
    is_derangement,
    problem_from_dict,
    problem_to_dict,
)
from .partition import (
    blocks_from_sizes,
    canonical_partition,
    largest_first_construct,
    partition_exists,
)
from .mechanisms import (
    MECHANISM_TAGS,
    effective_partition,
    final_order,
    initial_derangement,
    npb_draft_priority,
    run_bttc,
    run_cettc,
    run_csd,
    run_mechanism,
    run_npb,
    run_sd_within_groups,
    run_tsd,
    run_ttc,
)
from .verifier import (
    PropertyReport,
    Scope,
    SelectionScanReport,
    cee_set,
    check_ce,
    check_cee,
    check_eap,
    check_own_position_invariance,
    check_pareto,
    check_ri,
    check_sp,
    derangements,
    eap_efficient,
    enumerate_improvements,
    is_ce_efficient,
    is_improvement,
    pareto_efficient,
    revalidate_witness,
    scan_ce_efficient_selections,
    universal_impossibility_scan,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AssignmentPartition",
    "EnumerationBoundExceeded",
    "FinalOrder",
    "Infeasible",
    "MECHANISM_TAGS",
    "MalformedProblem",
    "MechanismId",
    "PartitionGroup",
    "PreferenceProfile",
    "Problem",
    "PropertyReport",
    "Scope",
    "SelectionScanReport",
    "Trace",
    "TraceStep",
    "blocks_from_sizes",
    "canonical_partition",
    "cee_set",
    "check_ce",
    "check_cee",
    "check_eap",
    "check_own_position_invariance",
    "check_pareto",
    "check_ri",
    "check_sp",
    "complete_partial_profile",
    "derangements",
    "eap_efficient",
    "effective_partition",
    "enumerate_improvements",
    "final_order",
    "initial_derangement",
    "is_ce_efficient",
    "is_derangement",
    "is_improvement",
    "largest_first_construct",
    "npb_draft_priority",
    "pareto_efficient",
    "partition_exists",
    "problem_from_dict",
    "problem_to_dict",
    "revalidate_witness",
    "run_bttc",
    "run_cettc",
    "run_csd",
    "run_mechanism",
    "run_npb",
    "run_sd_within_groups",
    "run_tsd",
    "run_ttc",
    "scan_ce_efficient_selections",
    "universal_impossibility_scan",
    "__version__",
]
