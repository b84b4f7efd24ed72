import json

import numpy as np
import pytest

from overlap_causal.experiments import (
    PRESETS,
    ExperimentConfig,
    Metrics,
    gen_synthetic1,
    gen_synthetic2,
    load_fixture,
    make_overlap_problem,
    melancon_dag,
    overlap_split,
    precision_recall,
    random_truth,
    run_experiment,
)
from overlap_causal.experiments.generators import SYNTHETIC2_TRUTH, node_names, topological_order
from overlap_causal.experiments.runner import FIXTURES, sample_size_sem
from overlap_causal.graph import GraphError, Mark, MixedGraph, m_separated, validate_mag
from overlap_causal.independence import DataError, hsic_test, kernel_ci_test

P = MixedGraph.parse


def test_synthetic1_determinism_and_support():
    a, b = gen_synthetic1(200, 7), gen_synthetic1(200, 7)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert a.variables == ("X", "Y", "Z")
    assert np.all(a.column("X") > 0)
    assert not np.array_equal(a.samples, gen_synthetic1(200, 8).samples)
    with pytest.raises(DataError):
        gen_synthetic1(1, 0)


def test_synthetic2_determinism_and_columns():
    a = gen_synthetic2(100, 1)
    np.testing.assert_array_equal(a.samples, gen_synthetic2(100, 1).samples)
    assert set(a.variables) == set(SYNTHETIC2_TRUTH.nodes)


def test_synthetic2_truth_separations():
    assert m_separated(SYNTHETIC2_TRUTH, "W", "Y", {"Z"})
    assert m_separated(SYNTHETIC2_TRUTH, "S", "Y")


@pytest.mark.slow
def test_synthetic_data_ci_patterns():
    d1 = gen_synthetic1(3000, 0)
    assert kernel_ci_test(*(d1.column(v)[:1000] for v in "XZY")).independent
    d2 = gen_synthetic2(3000, 0)
    assert hsic_test(d2.column("S"), d2.column("Y")).independent
    assert kernel_ci_test(*(d2.column(v)[:1000] for v in "WYZ")).independent


def _uniform_dag_mean_edges(n):
    """Mean arc count of a uniformly drawn labelled DAG, from the counting recurrence by arcs."""
    from math import comb

    def mul(p, q):
        out = [0] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] += a * b
        return out

    polys = [[1]]
    for m in range(1, n + 1):
        total = [0]
        for k in range(1, m + 1):
            term = [comb(k * (m - k), e) for e in range(k * (m - k) + 1)]
            term = [(-1) ** (k + 1) * comb(m, k) * c for c in mul(term, polys[m - k])]
            total = [a + b for a, b in zip(total + [0] * len(term), term + [0] * len(total))]
        polys.append(total)
    p = polys[n]
    return sum(e * c for e, c in enumerate(p)) / sum(p)


def test_melancon_acyclic_and_stationary_density():
    rng = np.random.default_rng(0)
    dens = []
    for _ in range(1000):
        g = melancon_dag(6, rng)
        assert len(topological_order(g)) == 6
        dens.append(g.num_edges() / 15)
    exact = _uniform_dag_mean_edges(6) / 15
    assert exact == pytest.approx(0.58912, abs=1e-4)
    assert abs(np.mean(dens) - exact) < 0.01


def test_random_truth_projection_valid():
    rng = np.random.default_rng(1)
    for _ in range(200):
        t = random_truth(6, rng, p_conf=0.2)
        assert validate_mag(t.mag)
        assert set(t.mag.nodes) == set(t.observed)
    with pytest.raises(ValueError):
        random_truth(2, 0)


def test_overlap_split_shapes():
    names = node_names(6)
    assert names[0] == "X1"
    for k in range(1, 7):
        v1, v2 = overlap_split(names, k, k)
        assert len(set(v1) & set(v2)) == k
        assert set(v1) | set(v2) == set(names)
        assert len(v1) == (6 + k) // 2
    with pytest.raises(ValueError):
        overlap_split(names, 0)


def test_overlap_problem_oracle_and_data():
    t = random_truth(5, 3)
    sets = overlap_split(list(t.observed), 2, 3)
    oracle = make_overlap_problem(t.dag, sets)
    assert not oracle.datasets and oracle.truth_mag() == t.mag
    data = make_overlap_problem(t.dag, sets, n=50, seed=4)
    assert [d.variables for d in data.datasets] == [tuple(sorted(s)) for s in sets]
    # datasets are drawn independently
    shared = sorted(set(sets[0]) & set(sets[1]))[0]
    assert not np.array_equal(data.datasets[0].column(shared), data.datasets[1].column(shared))


def test_identical_sets_see_everything():
    t = random_truth(4, 5)
    p = make_overlap_problem(t.dag, [t.observed, t.observed])
    assert p.variable_sets[0] == p.variable_sets[1] == tuple(sorted(t.observed))


def test_precision_recall_examples():
    truth = P("X -> Y; Y -> Z")
    assert precision_recall([truth], truth) == Metrics(1, 1.0, 1.0)
    wrong = P("X <-> Y; Y <-> Z")
    assert precision_recall([truth, wrong], truth) == Metrics(2, 0.5, 0.5)
    with pytest.raises(GraphError):
        precision_recall([P("A -> B")], truth)


def test_precision_recall_empty_warns(caplog):
    assert precision_recall([], P("X -> Y")) == Metrics(0, 0.0, 0.0)
    assert "no solutions" in caplog.text


def test_fixtures_load():
    for name in FIXTURES:
        fx = load_fixture(name)
        covered = set().union(*map(set, fx.variable_sets))
        assert covered <= set(fx.graph.nodes)
    sample = load_fixture("sample_size")
    assert set(sample.variable_sets[0]) == {"y", "x", "t", "z", "u", "v"}
    with pytest.raises(KeyError):
        load_fixture("nope")


def test_sample_size_sem_covers_edges():
    sem = sample_size_sem()
    ds = sem.sample(100, 0)
    assert ds.n == 100 and set(ds.variables) == set(sem.dag.nodes)


def test_config_from_dict():
    cfg = ExperimentConfig.from_dict({"id": "a", "kind": "synthetic1", "seeds": [1, 2]})
    assert cfg.seeds == (1, 2)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"id": "a", "kind": "synthetic1", "bogus": 1})


def test_run_experiment_synthetic1_report():
    report = run_experiment(PRESETS["synthetic1"])
    rows = {r.mode: r for r in report.rows}
    assert set(rows) == {"iod", "iod-bcd", "causal-iod"}
    assert rows["causal-iod"].mag_count == 1
    assert rows["causal-iod"].precision == rows["causal-iod"].recall == 1.0
    assert rows["causal-iod"].mag_count <= rows["iod-bcd"].mag_count <= rows["iod"].mag_count
    data = json.loads(report.to_json())
    assert len(data["instances"]) == 3
    assert "MAG count" in report.table().splitlines()[0]


def test_budget_marks_row_intractable():
    cfg = ExperimentConfig("s2", "synthetic2", ("iod",), budget_seconds=0.01)
    report = run_experiment(cfg)
    (row,) = report.rows
    assert row.intractable and row.mag_count is None
    assert " - " in report.table().splitlines()[-1]
