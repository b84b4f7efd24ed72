"""Experiment configurations, execution and Table-style reports."""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from ..graph import MixedGraph, from_dict
from ..independence import Dataset
from ..iod import Budget, BudgetExceeded
from ..pipeline import MODES, OverlapProblem, discover
from .generators import (
    Sem,
    gen_synthetic1,
    gen_synthetic2,
    overlap_split,
    random_sem,
    random_truth,
)
from .metrics import Metrics, precision_recall

log = logging.getLogger(__name__)

FIXTURES = ("motivating", "sachs", "sample_size", "synthetic1", "synthetic2")


@dataclass(frozen=True)
class Fixture:
    name: str
    graph: MixedGraph
    variable_sets: tuple[tuple[str, ...], ...]
    description: str = ""


def load_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    text = resources.files(__package__).joinpath("fixtures", f"{name}.json").read_text("utf-8")
    data = json.loads(text)
    return Fixture(
        name,
        from_dict(data["graph"]),
        tuple(tuple(v) for v in data["variable_sets"]),
        data.get("description", ""),
    )


# Sample-size fixture mechanisms: each parent enters through its own
# non-injective nonlinearity, so every adjacent pair is orientable.
SAMPLE_SIZE_FUNCTIONS = {
    ("t", "x"): "square",
    ("u", "v"): "abs",
    ("v", "w"): "square",
    ("x", "u"): "sin",
    ("y", "x"): "abs",
    ("y", "z"): "square",
    ("z", "u"): "sin",
}


def sample_size_sem() -> Sem:
    fx = load_fixture("sample_size")
    return Sem(fx.graph, dict(SAMPLE_SIZE_FUNCTIONS), {v: 0.5 for v in fx.graph.nodes})


Sampler = Callable[[int, np.random.Generator], Dataset]


def _sampler_for(name: str, truth: MixedGraph, seed) -> Sampler:
    if name == "synthetic1":
        return lambda n, rng: gen_synthetic1(n, rng)
    if name == "synthetic2":
        return lambda n, rng: gen_synthetic2(n, rng)
    sem = sample_size_sem() if name == "sample_size" else random_sem(truth, seed)
    return lambda n, rng: sem.sample(n, rng)


def make_overlap_problem(
    truth: MixedGraph,
    variable_sets: Sequence[Sequence[str]],
    n: int | None = None,
    seed=None,
    sampler: Sampler | None = None,
    name: str = "",
) -> OverlapProblem:
    """Oracle problem when ``n`` is ``None``; otherwise ``n`` fresh samples per dataset."""
    sets = [tuple(sorted(v)) for v in variable_sets]
    problem = OverlapProblem(sets, truth=truth, name=name)
    if n is None:
        return problem
    rng = np.random.default_rng(seed)
    draw = sampler or _sampler_for(name, truth, rng)
    problem.datasets = [draw(n, rng).subset(vs, f"{name}-{i}") for i, vs in enumerate(sets)]
    return problem


# ------------------------------------------------------------------ config
@dataclass
class ExperimentConfig:
    """``kind`` is a fixture name or ``overlap``; ``n`` of ``None`` means oracle tests."""

    id: str
    kind: str
    modes: tuple[str, ...] = MODES
    seeds: tuple[int, ...] = (0,)
    n: int | None = None
    sizes: tuple[int, ...] = ()
    overlaps: tuple[int, ...] = ()
    nodes: int = 6
    p_conf: float = 0.0
    ci: str = "oracle"
    bcd: str = "oracle"
    alpha: float = 0.05
    max_cond_size: int | None = None
    budget_seconds: float | None = None
    max_samples: int | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        out = dict(data)
        for key in ("modes", "seeds", "sizes", "overlaps"):
            if key in out:
                out[key] = tuple(out[key])
        return cls(**out)


PRESETS: dict[str, ExperimentConfig] = {
    "synthetic1": ExperimentConfig("synthetic1", "synthetic1"),
    "synthetic1-data": ExperimentConfig(
        "synthetic1-data", "synthetic1", ("causal-iod",), tuple(range(10)), n=3000, ci="kernel", bcd="kcdc"
    ),
    "synthetic2": ExperimentConfig("synthetic2", "synthetic2", budget_seconds=600.0),
    "overlap": ExperimentConfig("overlap", "overlap", seeds=tuple(range(20)), overlaps=(2, 3, 4)),
    "sample-size": ExperimentConfig(
        "sample-size",
        "sample_size",
        ("causal-iod",),
        tuple(range(5)),
        sizes=(200, 400, 600, 800, 1000),
        bcd="kcdc",
    ),
}


# ------------------------------------------------------------------ report
@dataclass
class Instance:
    experiment: str
    setting: str
    mode: str
    seed: int
    mag_count: int | None
    precision: float | None
    recall: float | None
    seconds: float
    # a lower bound when the budget ran out
    complete: bool = True


@dataclass
class Row:
    experiment: str
    setting: str
    mode: str
    instances: int
    mag_count: float | None
    precision: float | None
    recall: float | None
    seconds: float
    intractable: bool = False


@dataclass
class Report:
    rows: list[Row] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"rows": [asdict(r) for r in self.rows], "instances": [asdict(i) for i in self.instances]},
            indent=2,
        )

    def table(self) -> str:
        head = ("Experiment", "Overlap/Total", "Algorithm", "MAG count", "P", "R", "Time (s)")
        body = []
        for r in self.rows:
            if r.intractable:
                count = p = rec = "-"
            else:
                count = f"{r.mag_count:g}" if r.mag_count == int(r.mag_count) else f"{r.mag_count:.1f}"
                p, rec = f"{r.precision:.2f}", f"{r.recall:.2f}"
            body.append((r.experiment, r.setting, r.mode, count, p, rec, f"{r.seconds:.1f}"))
        widths = [max(len(str(x[i])) for x in [head, *body]) for i in range(len(head))]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*row) for row in body]
        return "\n".join(lines)


def _problems(cfg: ExperimentConfig):
    """Yield ``(setting, seed, problem)`` for every instance of the configuration."""
    if cfg.kind == "overlap":
        for k in cfg.overlaps:
            for seed in cfg.seeds:
                rng = np.random.default_rng([seed, k])
                # split fixed before the graph is drawn
                names = [f"X{i}" for i in range(1, cfg.nodes + 1)]
                split = overlap_split(names, k, rng)
                truth = random_truth(cfg.nodes, rng, cfg.p_conf)
                yield f"{k}/{cfg.nodes}", seed, make_overlap_problem(
                    truth.dag, split, cfg.n, [seed, k, 1], name=f"overlap-{k}"
                )
        return
    fx = load_fixture(cfg.kind)
    total = len(set().union(*map(set, fx.variable_sets)))
    shared = len(set.intersection(*map(set, fx.variable_sets)))
    sizes = cfg.sizes or (cfg.n,)
    for n in sizes:
        setting = f"{shared}/{total}" if n is None else f"{shared}/{total} n={n}"
        for seed in cfg.seeds:
            yield setting, seed, make_overlap_problem(fx.graph, fx.variable_sets, n, seed, name=fx.name)


def run_instance(cfg: ExperimentConfig, problem: OverlapProblem, mode: str) -> tuple[Metrics, bool, float]:
    """Metrics, completeness and seconds; an exhausted budget yields the partial count with no P/R."""
    budget = Budget(cfg.budget_seconds) if cfg.budget_seconds else None
    started = time.monotonic()
    try:
        result = discover(
            problem,
            mode,
            ci=cfg.ci,
            bcd=cfg.bcd,
            alpha=cfg.alpha,
            max_cond_size=cfg.max_cond_size,
            budget=budget,
            max_samples=cfg.max_samples,
        )
    except BudgetExceeded as exc:
        partial = exc.partial.total_mags if exc.partial is not None else 0
        return Metrics(partial, float("nan"), float("nan")), False, time.monotonic() - started
    metrics = precision_recall(result.mags(), problem.truth_mag())
    return metrics, True, time.monotonic() - started


def run_experiment(cfg: ExperimentConfig, progress: Callable[[Instance], None] | None = None) -> Report:
    report = Report()
    grouped: dict[tuple[str, str], list[Instance]] = {}
    for setting, seed, problem in _problems(cfg):
        for mode in cfg.modes:
            metrics, complete, seconds = run_instance(cfg, problem, mode)
            inst = Instance(
                cfg.id,
                setting,
                mode,
                seed,
                metrics.mag_count,
                metrics.precision if complete else None,
                metrics.recall if complete else None,
                seconds,
                complete,
            )
            report.instances.append(inst)
            grouped.setdefault((setting, mode), []).append(inst)
            if progress is not None:
                progress(inst)
    for (setting, mode), items in grouped.items():
        done = [i for i in items if i.complete]
        secs = float(np.mean([i.seconds for i in items]))
        if len(done) < len(items):
            report.rows.append(Row(cfg.id, setting, mode, len(items), None, None, None, secs, True))
            continue
        report.rows.append(
            Row(
                cfg.id,
                setting,
                mode,
                len(items),
                float(np.mean([i.mag_count for i in done])),
                float(np.mean([i.precision for i in done])),
                float(np.mean([i.recall for i in done])),
                secs,
            )
        )
    return report
