"""Pair structure inside a MAG via separation in mutilated graphs, and candidate filtering."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

from .bcd import CausalStore, Structure
from .graph import GraphError, MixedGraph, _bits

log = logging.getLogger(__name__)


class CriterionProfile(NamedTuple):
    """Separation of ``(x, y)`` with the empty set after one mutilation each."""

    second_incoming: bool
    second_outgoing: bool
    first_incoming: bool
    first_outgoing: bool

    def bits(self) -> str:
        return "".join("T" if b else "F" for b in self)


CRITERIA: dict[tuple[bool, bool, bool, bool], Structure] = {
    (True, False, False, True): Structure.DIRECTED_AB,
    (False, True, True, False): Structure.DIRECTED_BA,
    (True, False, True, False): Structure.COMMON,
    (True, False, False, False): Structure.DIRECTED_COMMON_AB,
    (False, False, True, False): Structure.DIRECTED_COMMON_BA,
}
CRITERION_NUMBER = {s: i + 1 for i, s in enumerate(CRITERIA.values())}


def _up(parents: list[int], v: int) -> int:
    """``v`` and its ancestors."""
    seen = 1 << v
    frontier = parents[v] & ~seen
    while frontier:
        seen |= frontier
        nxt = 0
        for u in _bits(frontier):
            nxt |= parents[u]
        frontier = nxt & ~seen
    return seen


def _separated(parents: list[int], bidi: list[int], x: int, y: int) -> bool:
    # given the empty set only collider-free paths connect: a shared ancestor,
    # or a bidirected edge between the two ancestor sets
    ax, ay = _up(parents, x), _up(parents, y)
    if ax & ay:
        return False
    return not any(bidi[a] & ay for a in _bits(ax))


def criterion_profile(g: MixedGraph, x: str, y: str) -> CriterionProfile:
    if x == y:
        raise GraphError("a pair needs two distinct nodes")
    if g.has_circles():
        raise GraphError("criterion profiles need a MAG without circle marks")
    for v in (x, y):
        if v not in g.nodes:
            raise GraphError(f"unknown node {v!r}")
    i, j = g.index(x), g.index(y)
    pa = list(g.parent_masks)
    bidi = [a & ~p for a, p in zip(g.arrow_masks, pa)]

    def without_incoming(v):
        p, b = list(pa), [m & ~(1 << v) for m in bidi]
        p[v] = 0
        b[v] = 0
        return _separated(p, b, i, j)

    def without_outgoing(v):
        return _separated([m & ~(1 << v) for m in pa], bidi, i, j)

    return CriterionProfile(without_incoming(j), without_outgoing(j), without_incoming(i), without_outgoing(i))


_DIRECTED_PART = {
    Structure.DIRECTED_COMMON_AB: Structure.DIRECTED_AB,
    Structure.DIRECTED_COMMON_BA: Structure.DIRECTED_BA,
}


def _confounded_outside(g: MixedGraph, i: int, j: int, skip: int) -> bool:
    """A collider-free path into both ends whose inner nodes avoid ``skip``."""
    keep = ~(skip | 1 << i | 1 << j)
    pa = [m & keep for m in g.parent_masks]
    bidi = [a & ~p & ~skip for a, p in zip(g.arrow_masks, g.parent_masks)]
    for v in _bits(skip):
        pa[v] = bidi[v] = 0
    return not _separated(pa, bidi, i, j)


def classify_pair(g: MixedGraph, x: str, y: str, context: Iterable[str] = ()) -> Structure:
    """Structure of the ordered pair; ``INDEPENDENT`` if every mutilation separates it.

    For a directed pair, confounding that only runs through ``context`` is
    not counted.
    """
    prof = criterion_profile(g, x, y)
    if all(prof):
        return Structure.INDEPENDENT
    hit = CRITERIA.get(tuple(prof))
    if hit is None:
        log.debug("pair (%s, %s) profile %s matches no criterion", x, y, prof.bits())
        return Structure.UNMATCHED
    skip = g.mask(set(context) & set(g.nodes) - {x, y})
    if skip and hit in _DIRECTED_PART and not _confounded_outside(g, g.index(x), g.index(y), skip):
        return _DIRECTED_PART[hit]
    return hit


# a MAG cannot show a latent confounder of a directed pair
_ALSO_MATCHES = {
    Structure.DIRECTED_COMMON_AB: Structure.DIRECTED_AB,
    Structure.DIRECTED_COMMON_BA: Structure.DIRECTED_BA,
}


def consistent_mag(g: MixedGraph, store: CausalStore) -> bool:
    """Every stored pair is classified in ``g`` as stored.

    Pairs are classified relative to their stored context.  A stored
    directed-plus-confounded pair also accepts the plain directed
    classification.
    """
    for a, b, s in store.entries():
        if a not in g.nodes or b not in g.nodes:
            raise GraphError(f"stored pair ({a}, {b}) is not in the graph")
        got = classify_pair(g, a, b, store.context(a, b))
        if got is not s and got is not _ALSO_MATCHES.get(s):
            return False
    return True


@dataclass
class Solution:
    kind: str  # "pag" or "mag"
    graph: MixedGraph
    members: list[MixedGraph]

    @property
    def member_count(self) -> int:
        return len(self.members)


@dataclass
class SolutionSet:
    mode: str
    solutions: list[Solution] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def total_mags(self) -> int:
        return sum(s.member_count for s in self.solutions)

    def mags(self) -> list[MixedGraph]:
        return [m for s in self.solutions for m in s.members]

    def __len__(self) -> int:
        return len(self.solutions)


def as_solutions(candidates: Iterable, mode: str) -> SolutionSet:
    """Candidates reported unchanged, one PAG each."""
    return SolutionSet(mode, [Solution("pag", c.pag, list(c.members)) for c in candidates])


def filter_solutions(candidates: Sequence, store: CausalStore, mode: str = "causal-iod") -> SolutionSet:
    """Keep a candidate whole when all its members agree with ``store``; otherwise keep the agreeing members alone."""
    out = SolutionSet(mode)
    dropped = 0
    for cand in candidates:
        passing = [m for m in cand.members if consistent_mag(m, store)]
        if not passing:
            dropped += 1
            continue
        if len(passing) == len(cand.members):
            out.solutions.append(Solution("pag", cand.pag, passing))
        else:
            out.solutions.extend(Solution("mag", m, [m]) for m in passing)
    out.diagnostics["dropped_candidates"] = dropped
    if candidates and not out.solutions:
        out.diagnostics["empty"] = "no candidate agrees with the stored pair structures"
    return out
