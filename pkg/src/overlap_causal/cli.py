"""Command-line entry point: ``overlap-causal <command> [flags]``.

Exit codes: 0 success, 1 error (nothing written), 2 budget exhausted
(partial results written and flagged incomplete).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bcd import ContradictionError, load_expert_knowledge
from .criteria import SolutionSet
from .experiments.generators import (
    SYNTHETIC1_SPLIT,
    SYNTHETIC1_TRUTH,
    SYNTHETIC2_SPLIT,
    SYNTHETIC2_TRUTH,
    gen_synthetic1,
    gen_synthetic2,
    overlap_split,
    random_sem,
    random_truth,
)
from .experiments.metrics import precision_recall
from .experiments.runner import PRESETS, ExperimentConfig, run_experiment
from .graph import GraphError, MixedGraph, from_dict, is_ancestral, is_maximal, load_graph, marginalize, to_dict, to_dot
from .independence import DataError, read_csv, write_csv
from .iod import Budget, BudgetExceeded, InputError
from .pipeline import MODES, OverlapProblem, discover

log = logging.getLogger("overlap_causal")

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2
CONFIG_KEYS = {
    "datasets", "mode", "ci", "bcd", "alpha", "max_cond_size", "budget_seconds",
    "truth_graph", "expert", "max_samples", "jobs",
}


class CliError(Exception):
    pass


# ---------------------------------------------------------------- logging
def _setup_logging(buffer: io.StringIO | None = None) -> None:
    level = os.environ.get("OVERLAP_CAUSAL_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    root = logging.getLogger("overlap_causal")
    root.handlers.clear()
    root.setLevel(logging.DEBUG)
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    err = logging.StreamHandler(sys.stderr)
    err.setLevel(level)
    err.setFormatter(fmt)
    root.addHandler(err)
    if buffer is not None:
        mem = logging.StreamHandler(buffer)
        mem.setLevel(logging.INFO)
        mem.setFormatter(fmt)
        root.addHandler(mem)


# ------------------------------------------------------------------ output
class _Staging:
    """Files are written to a scratch directory and moved into place only on commit."""

    def __init__(self, out: Path):
        self.out = out
        self.tmp = Path(tempfile.mkdtemp(prefix=".staging-", dir=out.parent if out.parent.exists() else None))

    def write(self, name: str, text: str) -> None:
        (self.tmp / name).write_text(text, encoding="utf-8")

    def path(self, name: str) -> Path:
        return self.tmp / name

    def commit(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        for f in sorted(self.tmp.iterdir()):
            shutil.move(str(f), self.out / f.name)
        self.discard()

    def discard(self) -> None:
        shutil.rmtree(self.tmp, ignore_errors=True)


def solutions_to_dict(result: SolutionSet) -> dict:
    return {
        "mode": result.mode,
        "total_mags": result.total_mags,
        "solutions": [
            {
                "kind": s.kind,
                "graph": to_dict(s.graph),
                "member_count": s.member_count,
                "members": [to_dict(m) for m in s.members],
            }
            for s in result.solutions
        ],
        "diagnostics": result.diagnostics,
    }


def read_solution_mags(path) -> list[MixedGraph]:
    """MAGs from a solutions file, a single graph file, or a JSON list of graphs."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "solutions" in data:
        return [from_dict(m) for s in data["solutions"] for m in s["members"]]
    if isinstance(data, dict):
        return [from_dict(data)]
    if isinstance(data, list):
        return [from_dict(g) for g in data]
    raise CliError(f"{path}: unrecognized solutions format")


# ---------------------------------------------------------------- discover
def load_problem_config(path: Path) -> dict:
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise CliError(f"{path}: config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise CliError(f"{path}: unknown config keys {sorted(unknown)}")
    if not cfg.get("datasets"):
        raise CliError(f"{path}: 'datasets' must be a non-empty list")
    return cfg


def build_problem(cfg: dict, base: Path) -> OverlapProblem:
    """Variable sets from ``variables`` or CSV headers; CSVs are loaded when a path is given."""
    truth = None
    if cfg.get("truth_graph"):
        truth = load_graph(base / cfg["truth_graph"])
    sets, data = [], []
    for i, entry in enumerate(cfg["datasets"]):
        if not isinstance(entry, dict):
            raise CliError(f"dataset {i}: expected an object with 'path' and/or 'variables'")
        if entry.get("path"):
            ds = read_csv(base / entry["path"], entry.get("variables"))
            data.append(ds)
            sets.append(ds.variables)
        elif entry.get("variables"):
            sets.append(tuple(entry["variables"]))
        else:
            raise CliError(f"dataset {i}: needs 'path' or 'variables'")
    if data and len(data) != len(sets):
        raise CliError("either every dataset has a CSV path or none does")
    return OverlapProblem(sets, data, truth)


def cmd_discover(args) -> int:
    cfg_path = Path(args.config)
    cfg = load_problem_config(cfg_path)
    for key in ("mode", "ci", "bcd", "alpha", "budget_seconds", "jobs"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:12]
    log.info("config %s hash=%s seed=%s", cfg_path, digest, args.seed)
    problem = build_problem(cfg, cfg_path.parent)
    expert = load_expert_knowledge(cfg_path.parent / cfg["expert"]) if cfg.get("expert") else None
    budget = Budget(cfg["budget_seconds"]) if cfg.get("budget_seconds") else None
    code = EXIT_OK
    try:
        result = discover(
            problem,
            cfg.get("mode", "causal-iod"),
            ci=cfg.get("ci", "kernel"),
            bcd=cfg.get("bcd", "kcdc"),
            alpha=float(cfg.get("alpha", 0.05)),
            max_cond_size=cfg.get("max_cond_size"),
            budget=budget,
            jobs=int(cfg.get("jobs") or 1),
            expert=expert,
            max_samples=cfg.get("max_samples"),
        )
    except BudgetExceeded as exc:
        log.warning("%s; writing partial results", exc)
        result, code = exc.partial, EXIT_PARTIAL

    payload = solutions_to_dict(result)
    payload["config_hash"] = digest
    payload["seed"] = args.seed
    if problem.truth is not None and result.solutions:
        payload["metrics"] = precision_recall(result.mags(), problem.truth_mag()).as_dict()

    stage = _Staging(Path(args.out))
    try:
        stage.write("solutions.json", json.dumps(payload, indent=2) + "\n")
        for i, sol in enumerate(result.solutions, 1):
            stage.write(f"solution_{i:03d}.dot", to_dot(sol.graph, f"{sol.kind}_{i}"))
        stage.write("run.log", args.log_buffer.getvalue())
        stage.commit()
    except BaseException:
        stage.discard()
        raise
    status = "complete" if code == EXIT_OK else "incomplete"
    print(f"{len(result.solutions)} solutions, {result.total_mags} MAGs ({status}) -> {args.out}")
    if "metrics" in payload:
        m = payload["metrics"]
        print(f"P={m['precision']:.2f} R={m['recall']:.2f}")
    return code


# ------------------------------------------------------------------- synth
def cmd_synth(args) -> int:
    if args.n < 2:
        raise CliError("--n must be at least 2")
    rng = np.random.default_rng(args.seed)
    if args.name == "synthetic1":
        truth, split, full = SYNTHETIC1_TRUTH, SYNTHETIC1_SPLIT, gen_synthetic1(args.n, rng)
    elif args.name == "synthetic2":
        truth, split, full = SYNTHETIC2_TRUTH, SYNTHETIC2_SPLIT, gen_synthetic2(args.n, rng)
    else:
        names = [f"X{i}" for i in range(1, args.nodes + 1)]
        split = overlap_split(names, args.overlap, rng)
        truth = random_truth(args.nodes, rng, args.p_conf).dag
        full = random_sem(truth, rng).sample(args.n, rng)
    stage = _Staging(Path(args.out))
    try:
        entries = []
        for i, vs in enumerate(split, 1):
            name = f"dataset_{i}.csv"
            write_csv(full.subset(list(vs)), stage.path(name))
            entries.append({"path": name})
        stage.write("truth.json", json.dumps(to_dict(truth), indent=2) + "\n")
        config = {"datasets": entries, "mode": "causal-iod", "ci": "kernel", "bcd": "kcdc", "truth_graph": "truth.json"}
        stage.write("config.json", json.dumps(config, indent=2) + "\n")
        stage.commit()
    except BaseException:
        stage.discard()
        raise
    print(f"{len(split)} datasets of {args.n} samples -> {args.out}")
    return EXIT_OK


# -------------------------------------------------------------- experiment
def cmd_experiment(args) -> int:
    if args.config:
        try:
            cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise CliError(f"bad experiment config {args.config}: {exc}") from exc
    elif args.preset:
        cfg = replace(PRESETS[args.preset])
    else:
        raise CliError("give --preset or --config")
    overrides = {
        "seeds": (args.seed,) if args.seed is not None else None,
        "alpha": args.alpha,
        "budget_seconds": args.budget_seconds,
        "ci": args.ci,
        "bcd": args.bcd,
        "modes": (args.mode,) if args.mode else None,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})

    def progress(inst):
        log.info("%s %s %s seed=%d count=%s %.1fs", inst.experiment, inst.setting, inst.mode, inst.seed, inst.mag_count, inst.seconds)

    report = run_experiment(cfg, progress)
    table = report.table()
    if args.out:
        stage = _Staging(Path(args.out))
        try:
            stage.write("report.json", report.to_json() + "\n")
            stage.write("table.txt", table + "\n")
            stage.commit()
        except BaseException:
            stage.discard()
            raise
    print(table)
    return EXIT_OK


# -------------------------------------------------------------------- eval
def cmd_eval(args) -> int:
    mags = read_solution_mags(args.solutions)
    truth = load_graph(args.truth)
    if mags and set(mags[0].nodes) < set(truth.nodes):
        # latent-inclusive truth
        truth = marginalize(truth, mags[0].nodes)
    metrics = precision_recall(mags, truth)
    print(json.dumps(metrics.as_dict()))
    return EXIT_OK


# ---------------------------------------------------------- validate-graph
def cmd_validate(args) -> int:
    g = load_graph(args.graph)
    if g.has_circles():
        print(f"PAG with {len(g)} nodes and {g.num_edges()} edges")
        return EXIT_OK
    problems = []
    if not is_ancestral(g):
        problems.append("not ancestral")
    elif not is_maximal(g):
        problems.append("not maximal")
    if problems:
        print("invalid MAG: " + ", ".join(problems))
        return EXIT_ERROR
    print(f"valid MAG with {len(g)} nodes and {g.num_edges()} edges")
    return EXIT_OK


# -------------------------------------------------------------------- main
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="overlap-causal", description="Causal discovery over overlapping datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--budget-seconds", type=float, default=None)
        p.add_argument("--mode", choices=MODES, default=None)
        p.add_argument("--ci", choices=("oracle", "kernel"), default=None)
        p.add_argument("--bcd", choices=("oracle", "kcdc", "none"), default=None)

    p = sub.add_parser("discover", help="run discovery on a problem config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None)
    run_flags(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("synth", help="write synthetic overlapping datasets")
    p.add_argument("name", choices=("synthetic1", "synthetic2", "random"))
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--overlap", type=int, default=2)
    p.add_argument("--p-conf", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("experiment", help="run an experiment preset or config")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config")
    p.add_argument("--out")
    run_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("eval", help="score solutions against a truth graph")
    p.add_argument("solutions")
    p.add_argument("truth")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate-graph", help="check a graph file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.log_buffer = io.StringIO()
    _setup_logging(args.log_buffer)
    try:
        return args.func(args)
    except (CliError, InputError, DataError, GraphError, ContradictionError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
