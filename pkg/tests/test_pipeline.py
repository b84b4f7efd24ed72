import numpy as np
import pytest

from overlap_causal.bcd import CausalStore, Structure
from overlap_causal.criteria import consistent_mag
from overlap_causal.experiments import load_fixture, make_overlap_problem, overlap_split, random_truth
from overlap_causal.experiments.generators import SYNTHETIC1_SPLIT, SYNTHETIC1_TRUTH
from overlap_causal.graph import MixedGraph
from overlap_causal.iod import Budget, BudgetExceeded, InputError
from overlap_causal.pipeline import MODES, OverlapProblem, discover, make_ci

P = MixedGraph.parse


def motivating():
    fx = load_fixture("motivating")
    return OverlapProblem(list(fx.variable_sets), truth=fx.graph, name="motivating")


def test_modes_nest_on_motivating():
    prob = motivating()
    counts = {m: discover(prob, m).total_mags for m in MODES}
    assert counts["causal-iod"] <= counts["iod-bcd"] <= counts["iod"]
    result = discover(prob, "causal-iod")
    store = CausalStore(directed={("Y", "X")}, common={frozenset({"Y", "Z"})})
    assert result.diagnostics["store"] == store.to_list()
    assert all(consistent_mag(m, store) for m in result.mags())
    assert prob.truth_mag().key() in {m.key() for m in result.mags()}


def test_diagnostics_present():
    r = discover(OverlapProblem(list(SYNTHETIC1_SPLIT), truth=SYNTHETIC1_TRUTH), "iod")
    for key in ("tests", "store", "removable_edges", "immorality_candidates", "mags_checked", "complete"):
        assert key in r.diagnostics
    assert r.diagnostics["complete"] is True and r.diagnostics["store"] == []


def test_expert_knowledge_narrows_iod_bcd():
    prob = OverlapProblem(list(SYNTHETIC1_SPLIT), truth=SYNTHETIC1_TRUTH)
    base = discover(prob, "iod-bcd", bcd="none").total_mags
    expert = CausalStore()
    expert.add("X", "Y", Structure.DIRECTED_AB)
    narrowed = discover(prob, "iod-bcd", bcd="none", expert=expert).total_mags
    assert narrowed < base


def test_budget_exhaustion_carries_solution_set():
    prob = OverlapProblem(list(SYNTHETIC1_SPLIT), truth=SYNTHETIC1_TRUTH)
    with pytest.raises(BudgetExceeded) as info:
        discover(prob, "iod", budget=Budget(max_mags=2))
    partial = info.value.partial
    assert partial.diagnostics["complete"] is False
    assert partial.total_mags >= 2


def test_input_errors():
    prob = motivating()
    with pytest.raises(InputError):
        discover(prob, "fast")
    with pytest.raises(InputError):
        make_ci(OverlapProblem([("A", "B")]), "oracle")
    with pytest.raises(InputError):
        make_ci(prob, "kernel")
    with pytest.raises(InputError):
        make_ci(prob, "coin")
    with pytest.raises(InputError):
        OverlapProblem([("A", "Q")], truth=P("A -> B"))


@pytest.mark.parametrize("seed", range(5))
def test_random_oracle_completeness_and_soundness(seed):
    rng = np.random.default_rng([seed, 9])
    sets = overlap_split([f"X{i}" for i in range(1, 6)], 2, rng)
    truth = random_truth(5, rng)
    prob = make_overlap_problem(truth.dag, sets)
    result = discover(prob, "causal-iod")
    assert truth.mag.key() in {m.key() for m in result.mags()}
    store = CausalStore()
    for item in result.diagnostics["store"]:
        store.add(*item["pair"], Structure(item["structure"]), item.get("context", ()))
    assert all(consistent_mag(m, store) for m in result.mags())


@pytest.mark.slow
def test_data_mode_synthetic1_small():
    prob = make_overlap_problem(SYNTHETIC1_TRUTH, SYNTHETIC1_SPLIT, n=600, seed=0, name="synthetic1")
    result = discover(prob, "causal-iod", ci="kernel", bcd="kcdc")
    assert result.total_mags >= 1
