"""Synthetic generators, fixtures, metrics and experiment runs."""

from .generators import (
    SYNTHETIC1_SPLIT,
    SYNTHETIC2_SPLIT,
    Sem,
    gen_synthetic1,
    gen_synthetic2,
    melancon_dag,
    overlap_split,
    random_sem,
    random_truth,
)
from .metrics import Metrics, precision_recall
from .runner import (
    PRESETS,
    ExperimentConfig,
    Fixture,
    Report,
    load_fixture,
    make_overlap_problem,
    run_experiment,
)

__all__ = [
    "PRESETS",
    "SYNTHETIC1_SPLIT",
    "SYNTHETIC2_SPLIT",
    "ExperimentConfig",
    "Fixture",
    "Metrics",
    "Report",
    "Sem",
    "gen_synthetic1",
    "gen_synthetic2",
    "load_fixture",
    "make_overlap_problem",
    "melancon_dag",
    "overlap_split",
    "precision_recall",
    "random_sem",
    "random_truth",
    "run_experiment",
]
