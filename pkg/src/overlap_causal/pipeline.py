"""End-to-end discovery over overlapping datasets in the three comparison modes."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

from .bcd import CausalStore, classify_pairs
from .criteria import SolutionSet, as_solutions, filter_solutions
from .graph import MixedGraph, marginalize
from .independence import Dataset, KernelCi, OracleCi
from .iod import Budget, BudgetExceeded, InputError, SearchStats, iod_part1, iod_part2, run_part2_parallel

log = logging.getLogger(__name__)

MODES = ("iod", "iod-bcd", "causal-iod")


@dataclass
class OverlapProblem:
    """Variable sets of the datasets, with samples (data mode) or a truth DAG (oracle mode)."""

    variable_sets: list[tuple[str, ...]]
    datasets: list[Dataset] = field(default_factory=list)
    truth: MixedGraph | None = None
    name: str = ""

    def __post_init__(self):
        self.variable_sets = [tuple(sorted(v)) for v in self.variable_sets]
        if self.datasets and len(self.datasets) != len(self.variable_sets):
            raise InputError("one dataset per variable set is required")
        if self.truth is not None:
            missing = self.observed - set(self.truth.nodes)
            if missing:
                raise InputError(f"variables {sorted(missing)} are not in the truth graph")

    @property
    def observed(self) -> set[str]:
        return set().union(*map(set, self.variable_sets))

    def truth_mag(self) -> MixedGraph:
        if self.truth is None:
            raise InputError("the problem has no truth graph")
        return marginalize(self.truth, self.observed)


def make_ci(problem: OverlapProblem, ci: str, max_samples: int | None = None):
    if ci == "oracle":
        if problem.truth is None:
            raise InputError("oracle tests need a truth graph")
        return OracleCi(problem.truth)
    if ci == "kernel":
        if not problem.datasets:
            raise InputError("kernel tests need datasets")
        return KernelCi(problem.datasets, max_samples)
    raise InputError(f"unknown test backend {ci!r}")


def discover(
    problem: OverlapProblem,
    mode: str = "causal-iod",
    *,
    ci: str = "oracle",
    bcd: str = "oracle",
    alpha: float = 0.05,
    max_cond_size: int | None = None,
    budget: Budget | None = None,
    jobs: int = 1,
    expert: CausalStore | None = None,
    max_samples: int | None = None,
) -> SolutionSet:
    """Run part 1, pair classification (unless ``mode`` is ``iod``), part 2 and, for ``causal-iod``, filtering.

    On budget exhaustion ``BudgetExceeded.partial`` carries a ``SolutionSet``
    built from the candidates found so far.
    """
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")
    p1 = iod_part1(problem.variable_sets, make_ci(problem, ci, max_samples), alpha, max_cond_size)
    log.info("part 1: %d tests, %d separated pairs, %d inducing-path entries", p1.tests, len(p1.sepset), len(p1.ip))

    store = CausalStore()
    if mode != "iod":
        if bcd != "none":
            store = classify_pairs(
                p1.local_graphs,
                bcd,
                datasets=problem.datasets,
                truth=problem.truth,
                observed=problem.observed,
                max_samples=max_samples,
            )
        if expert is not None:
            store.merge(expert)
    log.info("pair store: %d entries", len(store))

    stats = SearchStats()
    use_store = store if mode != "iod" else None
    try:
        if jobs > 1:
            candidates = run_part2_parallel(p1, use_store, jobs, budget)
        else:
            candidates = iod_part2(p1, use_store, budget=budget, stats=stats)
        partial = None
    except BudgetExceeded as exc:
        candidates, partial = exc.partial, exc

    if mode == "causal-iod":
        result = filter_solutions(candidates, store, mode)
    else:
        result = as_solutions(candidates, mode)
    result.diagnostics.update(
        {
            "tests": p1.tests,
            "store": store.to_list(),
            "removable_edges": stats.removable,
            "immorality_candidates": stats.immorality_candidates,
            "mags_checked": stats.mags_checked,
            "complete": partial is None,
        }
    )
    if partial is not None:
        raise BudgetExceeded(str(partial), result) from None
    return result
