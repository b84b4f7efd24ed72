import json

import pytest

from overlap_causal.cli import main
from overlap_causal.experiments import load_fixture
from overlap_causal.graph import from_dict, load_graph, save_graph


@pytest.fixture
def motivating_config(tmp_path):
    fx = load_fixture("motivating")
    save_graph(fx.graph, tmp_path / "truth.json")
    cfg = {
        "datasets": [{"variables": list(v)} for v in fx.variable_sets],
        "mode": "causal-iod",
        "ci": "oracle",
        "bcd": "oracle",
        "truth_graph": "truth.json",
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(cfg))
    return path


def test_discover_writes_report(motivating_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["discover", "--config", str(motivating_config), "--out", str(out)]) == 0
    report = json.loads((out / "solutions.json").read_text())
    assert report["mode"] == "causal-iod"
    assert report["total_mags"] == sum(s["member_count"] for s in report["solutions"])
    assert (out / "run.log").exists()
    assert len(list(out.glob("solution_*.dot"))) == len(report["solutions"])
    for sol in report["solutions"]:
        for m in sol["members"]:
            g = from_dict(m)
            assert not (g.adjacent("X", "Z") and (g.is_directed("X", "Z") or g.is_directed("Z", "X")))
    assert "MAGs" in capsys.readouterr().out


def test_discover_mode_override(motivating_config, tmp_path):
    out = tmp_path / "iod"
    assert main(["discover", "--config", str(motivating_config), "--out", str(out), "--mode", "iod"]) == 0
    report = json.loads((out / "solutions.json").read_text())
    mags = [from_dict(m) for s in report["solutions"] for m in s["members"]]
    assert any(g.is_directed("X", "Z") for g in mags)


def test_missing_csv_writes_nothing(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"datasets": [{"path": "nope.csv"}, {"path": "nope2.csv"}]}))
    out = tmp_path / "out"
    assert main(["discover", "--config", str(cfg), "--out", str(out)]) == 1
    assert not out.exists()
    assert not list(tmp_path.glob(".staging-*"))


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["discover", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    cfg.write_text(json.dumps({"datasets": [{"variables": ["A", "B"]}], "colour": 1}))
    assert main(["discover", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_budget_exit_code(tmp_path):
    fx = load_fixture("synthetic2")
    save_graph(fx.graph, tmp_path / "truth.json")
    cfg = {
        "datasets": [{"variables": list(v)} for v in fx.variable_sets],
        "mode": "iod",
        "ci": "oracle",
        "truth_graph": "truth.json",
        "budget_seconds": 0.05,
    }
    (tmp_path / "p.json").write_text(json.dumps(cfg))
    out = tmp_path / "partial"
    assert main(["discover", "--config", str(tmp_path / "p.json"), "--out", str(out)]) == 2
    report = json.loads((out / "solutions.json").read_text())
    assert report["diagnostics"]["complete"] is False


def test_synth_and_discover_round_trip(tmp_path):
    out = tmp_path / "s1"
    assert main(["synth", "synthetic1", "--n", "200", "--seed", "3", "--out", str(out)]) == 0
    header = (out / "dataset_1.csv").read_text().splitlines()[0]
    assert header == "X,Y"
    assert (out / "dataset_2.csv").read_text().splitlines()[0] == "Y,Z"
    assert load_graph(out / "truth.json").nodes == ("X", "Y", "Z")
    assert json.loads((out / "config.json").read_text())["ci"] == "kernel"


def test_synth_synthetic2_overlap(tmp_path):
    out = tmp_path / "s2"
    assert main(["synth", "synthetic2", "--n", "50", "--out", str(out)]) == 0
    h1 = set((out / "dataset_1.csv").read_text().splitlines()[0].split(","))
    h2 = set((out / "dataset_2.csv").read_text().splitlines()[0].split(","))
    assert h1 & h2 == {"Z"}


def test_synth_rejects_zero(tmp_path):
    assert main(["synth", "synthetic1", "--n", "0", "--out", str(tmp_path / "z")]) == 1
    assert not (tmp_path / "z").exists()


def test_eval_and_validate(tmp_path, capsys):
    fx = load_fixture("synthetic1")
    save_graph(fx.graph, tmp_path / "t.json")
    assert main(["eval", str(tmp_path / "t.json"), str(tmp_path / "t.json")]) == 0
    assert json.loads(capsys.readouterr().out) == {"mag_count": 1, "precision": 1.0, "recall": 1.0}
    (tmp_path / "empty.json").write_text("[]")
    assert main(["eval", str(tmp_path / "empty.json"), str(tmp_path / "t.json")]) == 0
    assert json.loads(capsys.readouterr().out)["mag_count"] == 0
    assert main(["validate-graph", str(tmp_path / "t.json")]) == 0
    bad = {"nodes": ["A", "B", "C"], "edges": [
        {"a": "A", "b": "B", "mark_a": "tail", "mark_b": "arrow"},
        {"a": "B", "b": "C", "mark_a": "tail", "mark_b": "arrow"},
        {"a": "A", "b": "C", "mark_a": "arrow", "mark_b": "arrow"},
    ]}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    assert main(["validate-graph", str(tmp_path / "bad.json")]) == 1


def test_eval_node_mismatch(tmp_path):
    save_graph(load_fixture("synthetic1").graph, tmp_path / "a.json")
    (tmp_path / "b.json").write_text(json.dumps({"nodes": ["A", "B"], "edges": []}))
    assert main(["eval", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == 1


def test_experiment_preset(tmp_path, capsys):
    out = tmp_path / "exp"
    assert main(["experiment", "--preset", "synthetic1", "--out", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "table.txt").exists()
    assert "causal-iod" in capsys.readouterr().out
