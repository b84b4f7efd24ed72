import itertools

import numpy as np
import pytest

import oracles
from overlap_causal.bcd import CausalStore, Structure
from overlap_causal.criteria import (
    CRITERIA,
    CRITERION_NUMBER,
    CriterionProfile,
    Solution,
    SolutionSet,
    as_solutions,
    classify_pair,
    consistent_mag,
    criterion_profile,
    filter_solutions,
)
from overlap_causal.graph import GraphError, MixedGraph
from overlap_causal.iod import Candidate
from overlap_causal.orientation import enumerate_mags, mag_to_pag, mark_intersection

P = MixedGraph.parse

# Two-node structures with the confounding path made explicit through a third node.
CANONICAL_PAIRS = [
    (P("X -> Y"), "TFFT", Structure.DIRECTED_AB),
    (P("Y -> X"), "FTTF", Structure.DIRECTED_BA),
    (P("X <-> Y"), "TFTF", Structure.COMMON),
    (P("X -> Y; X <-> C; C -> Y"), "TFFF", Structure.DIRECTED_COMMON_AB),
    (P("Y -> X; Y <-> C; C -> X"), "FFTF", Structure.DIRECTED_COMMON_BA),
]


@pytest.mark.parametrize("g, bits, structure", CANONICAL_PAIRS)
def test_canonical_pair_profiles(g, bits, structure):
    assert criterion_profile(g, "X", "Y").bits() == bits
    assert classify_pair(g, "X", "Y") is structure
    assert CRITERION_NUMBER[structure] == CANONICAL_PAIRS.index((g, bits, structure)) + 1


def test_rows_are_distinct_and_not_all_true():
    patterns = list(CRITERIA)
    assert len(set(patterns)) == 5
    assert (True, True, True, True) not in CRITERIA


def test_edgeless_pair_disconnected():
    assert classify_pair(P("", ["X", "Y"]), "X", "Y") is Structure.INDEPENDENT


def test_directed_path_breaks_common_for_yz():
    g = P("Y -> X; X -> Z; Y <-> Z")
    prof = criterion_profile(g, "Y", "Z")
    assert prof.first_incoming is False
    assert classify_pair(g, "Y", "Z") is not Structure.COMMON
    assert classify_pair(g, "Y", "X") is Structure.DIRECTED_AB


def test_motivating_truth_common_cause():
    assert classify_pair(P("Y -> X; Y <-> Z"), "Y", "Z") is Structure.COMMON


def test_profile_errors():
    with pytest.raises(GraphError):
        criterion_profile(P("X -> Y"), "X", "X")
    with pytest.raises(GraphError):
        criterion_profile(P("X -> Y"), "X", "Q")


def test_profile_matches_path_oracle():
    # each profile bit recomputed by path enumeration on the mutilated graph
    rng = np.random.default_rng(0)
    from overlap_causal.graph import MutilationMode, mutilate

    for _ in range(40):
        g = oracles.random_mag(rng, 5, 1)
        for x, y in itertools.permutations(g.nodes, 2):
            prof = criterion_profile(g, x, y)
            runs = [
                (y, MutilationMode.REMOVE_INCOMING),
                (y, MutilationMode.REMOVE_OUTGOING),
                (x, MutilationMode.REMOVE_INCOMING),
                (x, MutilationMode.REMOVE_OUTGOING),
            ]
            want = [oracles.msep_by_paths(mutilate(g, v, m), x, y, set()) for v, m in runs]
            assert list(prof) == want


MOTIVATING_STORE = CausalStore(directed={("Y", "X")}, common={frozenset({"Y", "Z"})})


def test_consistent_mag_motivating():
    assert consistent_mag(P("Y -> X; Y <-> Z"), MOTIVATING_STORE)
    assert not consistent_mag(P("Y -> X; X -> Z; Y <-> Z"), MOTIVATING_STORE)
    assert not consistent_mag(P("Y -> X; Z -> X; Y <-> Z"), MOTIVATING_STORE)


def test_consistent_mag_missing_node():
    with pytest.raises(GraphError):
        consistent_mag(P("Y -> X"), MOTIVATING_STORE)


def test_second_directed_route_keeps_criterion_1():
    assert classify_pair(P("X -> C; C -> Y; X -> Y"), "X", "Y") is Structure.DIRECTED_AB


def test_unmatched_stored_pair_is_inconsistent(monkeypatch):
    import overlap_causal.criteria as crit

    monkeypatch.setattr(crit, "classify_pair", lambda g, a, b, context=(): Structure.UNMATCHED)
    assert not crit.consistent_mag(P("Y -> X; Y <-> Z"), MOTIVATING_STORE)


def _candidate(members):
    return Candidate(mark_intersection(members), list(members), (), ())


def test_filter_keeps_whole_pag_or_members():
    whole = _candidate([P("Y -> X; Y <-> Z")])
    mixed_members = enumerate_mags(mag_to_pag(P("Y -> X; X -> Z")))
    mixed = _candidate(mixed_members)
    out = filter_solutions([whole, mixed], MOTIVATING_STORE)
    assert out.solutions[0].kind == "pag"
    kept = {m.key() for m in out.mags()}
    assert kept <= {m.key() for m in [*whole.members, *mixed_members]}
    for m in out.mags():
        assert consistent_mag(m, MOTIVATING_STORE)
    assert all(s.kind == "mag" for s in out.solutions[1:])


def test_filter_empty_store_is_identity():
    cands = [_candidate(enumerate_mags(mag_to_pag(P("X -> Y; Y -> Z"))))]
    out = filter_solutions(cands, CausalStore())
    assert [s.kind for s in out.solutions] == ["pag"]
    assert out.total_mags == len(cands[0].members)


def test_filter_reports_empty():
    store = CausalStore(directed={("X", "Y")})
    out = filter_solutions([_candidate([P("Y -> X")])], store)
    assert not out.solutions
    assert out.diagnostics["dropped_candidates"] == 1
    assert "empty" in out.diagnostics


def test_solution_set_counts():
    s = SolutionSet("iod", [Solution("pag", P("X o-o Y"), [P("X -> Y"), P("Y -> X")])])
    assert len(s) == 1 and s.total_mags == 2 and len(s.mags()) == 2
    assert as_solutions([], "iod").total_mags == 0
    assert CriterionProfile(True, False, False, True).bits() == "TFFT"


def test_latent_confounder_of_directed_pair_accepted():
    store = CausalStore()
    store.add("X", "Y", Structure.DIRECTED_COMMON_AB)
    assert consistent_mag(P("X -> Y"), store)
    assert consistent_mag(P("X -> Y; X <-> C; C -> Y"), store)
    assert not consistent_mag(P("Y -> X"), store)


def test_measured_confounder_discounted_in_context():
    g = P("Y -> X; Y -> U; X -> U")
    assert classify_pair(g, "X", "U") is Structure.DIRECTED_COMMON_AB
    assert classify_pair(g, "X", "U", {"Y"}) is Structure.DIRECTED_AB
    assert classify_pair(P("X -> U; X <-> U2; U2 -> U; Y -> X"), "X", "U", {"Y"}) is Structure.DIRECTED_COMMON_AB
    store = CausalStore()
    store.add("X", "U", Structure.DIRECTED_AB, context={"Y"})
    assert consistent_mag(g, store)
    assert not consistent_mag(P("U -> X; Y -> X; Y -> U"), store)
