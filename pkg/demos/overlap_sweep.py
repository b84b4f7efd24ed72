"""Random 6-variable truths split into two datasets with 2, 3 or 4 shared variables.

Oracle tests throughout. Plain iod is left out because dense instances
run to tens of thousands of MAGs. Larger overlap leaves fewer candidate
MAGs; an instance that hits the budget reports a lower bound.
"""
from overlap_causal.experiments import ExperimentConfig, run_experiment

cfg = ExperimentConfig(
    "overlap-demo",
    "overlap",
    ("iod-bcd", "causal-iod"),
    seeds=tuple(range(4)),
    overlaps=(2, 3, 4),
    budget_seconds=10.0,
)


def show(inst):
    state = "" if inst.complete else " (budget hit, lower bound)"
    print(f"  {inst.setting:>10} seed {inst.seed} {inst.mode:>10}: {inst.mag_count} MAGs{state}")


report = run_experiment(cfg, progress=show)
print()
print(report.table())
