"""Causal structure learning from datasets that measure overlapping variable sets."""

from .bcd import CausalStore, ContradictionError, Structure, classify_pairs, kcdc_direction, oracle_bcd
from .criteria import SolutionSet, classify_pair, consistent_mag, criterion_profile, filter_solutions
from .graph import (
    GraphError,
    Mark,
    MixedGraph,
    MutilationMode,
    ancestors,
    has_inducing_path,
    m_separated,
    marginalize,
    markov_equivalent,
    mutilate,
    validate_mag,
)
from .independence import Dataset, fisher_pool, hsic_test, kernel_ci_test, read_csv
from .iod import Budget, BudgetExceeded, Candidate, InputError, iod_part1, iod_part2
from .orientation import enumerate_mags, mag_to_pag, pag_to_mag
from .pipeline import MODES, OverlapProblem, discover

__all__ = [
    "MODES",
    "Budget",
    "BudgetExceeded",
    "Candidate",
    "CausalStore",
    "ContradictionError",
    "Dataset",
    "GraphError",
    "InputError",
    "Mark",
    "MixedGraph",
    "MutilationMode",
    "OverlapProblem",
    "SolutionSet",
    "Structure",
    "ancestors",
    "classify_pair",
    "classify_pairs",
    "consistent_mag",
    "criterion_profile",
    "discover",
    "enumerate_mags",
    "filter_solutions",
    "fisher_pool",
    "has_inducing_path",
    "hsic_test",
    "iod_part1",
    "iod_part2",
    "kcdc_direction",
    "kernel_ci_test",
    "m_separated",
    "mag_to_pag",
    "marginalize",
    "markov_equivalent",
    "mutilate",
    "oracle_bcd",
    "pag_to_mag",
    "read_csv",
    "validate_mag",
]
