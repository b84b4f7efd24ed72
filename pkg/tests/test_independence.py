import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import oracles
from overlap_causal.experiments.generators import SYNTHETIC1_TRUTH, gen_synthetic1
from overlap_causal.graph import MixedGraph, m_separated
from overlap_causal.independence import (
    DataError,
    Dataset,
    KernelCi,
    OracleCi,
    fisher_pool,
    hsic_test,
    kernel_ci_test,
    median_bandwidth,
    oracle_ci,
    read_csv,
    write_csv,
)


def test_median_bandwidth_examples():
    assert median_bandwidth([0.0, 2.0]) == 2.0
    assert median_bandwidth([0.0, 1.0, 3.0]) == 2.0
    assert median_bandwidth(np.full(10, 4.2)) == 1.0
    with pytest.raises(DataError):
        median_bandwidth([1.0])


def test_hsic_detects_copy():
    x = np.random.default_rng(0).normal(size=500)
    d = hsic_test(x, x.copy())
    assert d.pvalue < 1e-3 and not d.independent


def test_hsic_input_errors():
    x = np.zeros(30)
    with pytest.raises(DataError):
        hsic_test(x, np.zeros(29))
    with pytest.raises(DataError):
        hsic_test(np.arange(10.0), np.arange(10.0))


def test_constant_column_declared_independent(caplog):
    x = np.random.default_rng(1).normal(size=50)
    d = hsic_test(x, np.ones(50))
    assert d.pvalue == 1.0 and d.independent
    assert "constant column" in caplog.text


def test_hsic_deterministic():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 200))
    assert hsic_test(x, y) == hsic_test(x, y)


def test_hsic_calibration_small():
    # shorter run of the acceptance calibration; 200 draws keep the band wide
    rng = np.random.default_rng(3)
    hits = sum(not hsic_test(*rng.normal(size=(2, 200))).independent for _ in range(200))
    assert 0.01 <= hits / 200 <= 0.11


def test_hsic_permutation_null_agrees():
    rng = np.random.default_rng(4)
    x = rng.normal(size=150)
    y = x**2 + 0.3 * rng.normal(size=150)
    assert hsic_test(x, y, permutations=200, seed=0).pvalue < 0.01


def test_kci_collider():
    rng = np.random.default_rng(5)
    n = 600
    x, y = rng.normal(size=(2, n))
    w = x + y + 0.3 * rng.normal(size=n)
    assert hsic_test(x, y).independent
    assert not kernel_ci_test(x, y, w[:, None]).independent


def test_kci_copy_given_noise_rejected():
    rng = np.random.default_rng(6)
    x = rng.normal(size=300)
    assert not kernel_ci_test(x, x.copy(), rng.normal(size=300)).independent


def test_kci_empty_conditioning_is_hsic():
    rng = np.random.default_rng(7)
    x, y = rng.normal(size=(2, 100))
    assert kernel_ci_test(x, y, np.empty((100, 0))) == hsic_test(x, y)


@pytest.mark.slow
def test_synthetic1_chain_tests():
    ds = gen_synthetic1(3000, 0)
    x, y, z = (ds.column(v)[:1000] for v in "XYZ")
    assert not hsic_test(ds.column("X"), ds.column("Y")).independent
    assert kernel_ci_test(x, z, y).independent


def test_fisher_pool_examples():
    for p in (1e-9, 0.03, 0.5, 1.0):
        assert abs(fisher_pool([p]) - p) < 1e-12
    assert fisher_pool([0.5, 0.5]) == pytest.approx(stats.chi2.sf(-4 * np.log(0.5), 4))
    assert fisher_pool([0.5, 0.5]) == pytest.approx(0.5966, abs=1e-4)
    assert fisher_pool([1e-6, 0.9]) < 1e-4
    assert fisher_pool([0.0, 0.5]) < 1e-100


def test_fisher_pool_rejects_bad_input():
    for bad in ([], [1.5], [-0.1], [float("nan")]):
        with pytest.raises(ValueError):
            fisher_pool(bad)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-12, 1.0), min_size=1, max_size=6), st.randoms())
def test_fisher_pool_permutation_invariant(ps, rnd):
    shuffled = ps[:]
    rnd.shuffle(shuffled)
    assert fisher_pool(shuffled) == pytest.approx(fisher_pool(ps), rel=1e-12, abs=1e-300)


def test_oracle_ci_examples():
    assert oracle_ci(SYNTHETIC1_TRUTH, "X", "Z", {"Y"}).independent
    d = oracle_ci(MixedGraph.parse("X -> Y"), "X", "Y")
    assert d.pvalue == 0.0 and not d.independent


def test_oracle_ci_matches_paths_on_random_graphs():
    rng = np.random.default_rng(8)
    for _ in range(20):
        g = oracles.random_dag(rng, 6, 0.4)
        for x, y in itertools.combinations(g.nodes, 2):
            rest = [v for v in g.nodes if v not in (x, y)]
            z = {v for v in rest if rng.random() < 0.4}
            assert oracle_ci(g, x, y, z).independent == oracles.msep_by_paths(g, x, y, z)


def test_oracle_backend_counts_queries():
    ci = OracleCi(SYNTHETIC1_TRUTH)
    assert ci.pvalue(0, "X", "Z", ("Y",)) == 1.0
    assert ci.queries == 1


def test_kernel_backend_caches_symmetric_keys():
    rng = np.random.default_rng(9)
    ds = Dataset(("A", "B"), rng.normal(size=(60, 2)))
    ci = KernelCi([ds])
    p = ci.pvalue(0, "A", "B", ())
    assert ci.pvalue(0, "B", "A", ()) == p
    assert len(ci.cache) == 1


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(("A",), np.zeros((1, 1)))
    with pytest.raises(DataError):
        Dataset(("A", "A"), np.zeros((3, 2)))
    with pytest.raises(DataError):
        Dataset(("A",), np.array([[1.0], [np.nan]]))
    with pytest.raises(DataError):
        Dataset(("A", "B"), np.zeros((3, 3)))


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(10)
    ds = Dataset(("A", "B", "C"), rng.normal(size=(20, 3)))
    path = tmp_path / "d.csv"
    write_csv(ds, path)
    back = read_csv(path)
    assert back.variables == ds.variables
    np.testing.assert_array_equal(back.samples, ds.samples)
    assert read_csv(path, ["C", "A"]).variables == ("C", "A")
    with pytest.raises(DataError):
        read_csv(path, ["Q"])


def test_csv_rejects_text(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("A,B\n1,x\n2,3\n")
    with pytest.raises(DataError):
        read_csv(path)
