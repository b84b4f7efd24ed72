"""Integration of overlapping datasets.

Part 1 runs the skeleton stages of FCI on every dataset (pooling tests that
several datasets can perform) and records separating sets and pairs that
no subset separated.  Part 2 searches over edge removals from the global
graph and over choices of unshielded colliders, keeping every MAG that is
consistent with the recorded separations and required inducing paths.
"""

from __future__ import annotations

import itertools
import logging
import time
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from .bcd import CausalStore
from .graph import (
    Mark,
    MixedGraph,
    _bits,
    _collider_path,
    _connected,
    inducing_path_fast,
    marginalize,
    markov_equivalent,
    unshielded_triples,
)
from .independence import fisher_pool
from .orientation import (
    OrientationConflict,
    completions,
    mag_to_pag,
    mark_intersection,
    orient,
)

log = logging.getLogger(__name__)


class BudgetExceeded(RuntimeError):
    """The search ran out of time or candidates; ``partial`` holds what was found."""

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = [] if partial is None else partial


class InputError(ValueError):
    """The dataset collection cannot be integrated."""


# ------------------------------------------------------------ bookkeeping
@dataclass(frozen=True)
class SepRecord:
    sepset: tuple[str, ...]
    datasets: tuple[int, ...]
    pvalue: float


class SepSet:
    """Separating sets found for unordered pairs."""

    def __init__(self):
        self._records: dict[frozenset, list[SepRecord]] = {}

    def add(self, x: str, y: str, s: Iterable[str], datasets: Iterable[int], pvalue: float) -> None:
        key = frozenset((x, y))
        rec = SepRecord(tuple(sorted(s)), tuple(sorted(datasets)), float(pvalue))
        bucket = self._records.setdefault(key, [])
        if all(r.sepset != rec.sepset for r in bucket):
            bucket.append(rec)

    def get(self, x: str, y: str) -> list[SepRecord]:
        return self._records.get(frozenset((x, y)), [])

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self._records

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(p)) for p in self._records)

    def items(self) -> Iterator[tuple[tuple[str, str], list[SepRecord]]]:
        for pair in self.pairs():
            yield pair, self._records[frozenset(pair)]

    def collider_status(self, x: str, y: str, z: str, within: frozenset | None = None) -> bool | None:
        """``True`` if ``z`` is in no recorded set of ``(x, y)``, ``False`` if in all, else ``None``.

        With ``within``, only records whose set lies inside it are used.
        """
        recs = [r for r in self.get(x, y) if within is None or within.issuperset(r.sepset)]
        if not recs:
            return None
        hits = [z in r.sepset for r in recs]
        if all(hits):
            return False
        if not any(hits):
            return True
        return None

    def restricted(self, variables: Iterable[str]) -> "SepSet":
        keep = frozenset(variables)
        out = SepSet()
        for (x, y), recs in self.items():
            if x in keep and y in keep:
                for r in recs:
                    if keep.issuperset(r.sepset):
                        out.add(x, y, r.sepset, r.datasets, r.pvalue)
        return out

    def __len__(self) -> int:
        return len(self._records)


class IpSet:
    """Pairs that no tested subset of a dataset's variables separated, with that variable set."""

    def __init__(self):
        self._entries: set[tuple[tuple[str, str], frozenset]] = set()

    def add(self, x: str, y: str, variables: Iterable[str]) -> None:
        self._entries.add((tuple(sorted((x, y))), frozenset(variables)))

    def __iter__(self):
        return iter(sorted(self._entries, key=lambda e: (e[0], sorted(e[1]))))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, item) -> bool:
        (x, y), vs = item
        return (tuple(sorted((x, y))), frozenset(vs)) in self._entries


@dataclass
class Part1Output:
    variables: tuple[str, ...]
    variable_sets: list[tuple[str, ...]]
    global_graph: MixedGraph
    local_graphs: list[MixedGraph]
    sepset: SepSet
    ip: IpSet
    tests: int = 0


class PooledTests:
    """Runs each (x, y | S) query once, pooling over every dataset that measures it."""

    def __init__(self, variable_sets: Sequence[Iterable[str]], ci):
        self.sets = [frozenset(v) for v in variable_sets]
        self.ci = ci
        self.cache: dict[tuple, tuple[float, tuple[int, ...]]] = {}

    def __call__(self, x: str, y: str, s: Sequence[str]) -> tuple[float, tuple[int, ...]]:
        a, b = sorted((x, y))
        key = (a, b, tuple(sorted(s)))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        need = {a, b, *s}
        ds = tuple(i for i, v in enumerate(self.sets) if need <= v)
        ps = [self.ci.pvalue(i, a, b, key[2]) for i in ds]
        p = ps[0] if len(ps) == 1 else fisher_pool(ps)
        self.cache[key] = (p, ds)
        return p, ds


# ------------------------------------------------------------------ part 1
def _possible_dsep(adj: dict[str, set[str]], marks: MixedGraph, x: str) -> set[str]:
    """Nodes reachable from ``x`` along paths whose inner triples are colliders or triangles."""
    out: set[str] = set()
    seen: set[tuple[str, str]] = set()
    frontier = [(x, w) for w in sorted(adj[x])]
    for edge in frontier:
        seen.add(edge)
    while frontier:
        nxt = []
        for prev, cur in frontier:
            out.add(cur)
            for w in sorted(adj[cur]):
                if w == prev or (cur, w) in seen:
                    continue
                collider = (
                    marks.mark(prev, cur) == Mark.ARROW and marks.mark(w, cur) == Mark.ARROW
                )
                if collider or w in adj[prev]:
                    seen.add((cur, w))
                    nxt.append((cur, w))
        frontier = nxt
    out.discard(x)
    return out


def _graph_from_adj(variables: Sequence[str], adj: dict[str, set[str]]) -> MixedGraph:
    edges = [(a, b, Mark.CIRCLE, Mark.CIRCLE) for a in variables for b in adj[a] if a < b]
    return MixedGraph(variables, edges)


def _orient_local(skeleton: MixedGraph, sepset: SepSet, within: frozenset) -> MixedGraph:
    """Local PAG from separating sets restricted to the dataset's variables."""
    names = skeleton.nodes
    colliders = [
        (a, c, b)
        for a, c, b in unshielded_triples(skeleton)
        if sepset.collider_status(names[a], names[b], names[c], within) is True
    ]

    def decide(theta, alpha, beta, gamma):
        return sepset.collider_status(names[theta], names[gamma], names[beta], within)

    try:
        return orient(skeleton, colliders, (), decide)
    except OrientationConflict:
        log.warning("conflicting orientations in local graph over %s; keeping unshielded colliders only", names)
        pm = [[Mark.CIRCLE if x != Mark.NONE else Mark.NONE for x in row] for row in skeleton.matrix]
        for a, c, b in colliders:
            pm[a][c] = pm[b][c] = Mark.ARROW
        return MixedGraph.from_matrix(names, pm)


def iod_part1(
    variable_sets: Sequence[Sequence[str]],
    ci,
    alpha: float = 0.05,
    max_cond_size: int | None = None,
) -> Part1Output:
    """Local skeleton search on every dataset and the global bookkeeping.

    ``ci`` must provide ``pvalue(dataset_index, x, y, z)``.  A pair is
    removed when the pooled p-value exceeds ``alpha``.
    """
    vsets = [tuple(sorted(set(v))) for v in variable_sets]
    if not vsets:
        raise InputError("no datasets given")
    for i, vs in enumerate(vsets):
        if len(vs) < 2:
            raise InputError(f"dataset {i} has fewer than two variables")
    if len(vsets) > 1:
        _check_connected_overlap(vsets)
    variables = tuple(sorted(set().union(*map(set, vsets))))
    tests = PooledTests(vsets, ci)
    sepset = SepSet()
    ip = IpSet()
    locals_: list[MixedGraph] = []

    for i, vs in enumerate(vsets):
        limit = len(vs) - 2 if max_cond_size is None else min(max_cond_size, len(vs) - 2)
        adj = {v: set(vs) - {v} for v in vs}

        def try_remove(x: str, y: str, candidates: Iterable[str], size: int) -> bool:
            for s in itertools.combinations(sorted(candidates), size):
                p, ds = tests(x, y, s)
                if p > alpha:
                    adj[x].discard(y)
                    adj[y].discard(x)
                    sepset.add(x, y, s, ds, p)
                    log.debug("dataset %d: %s _||_ %s | %s (p=%.3g)", i, x, y, s, p)
                    return True
            return False

        depth = 0
        while depth <= limit:
            any_tested = False
            for x in vs:
                for y in sorted(adj[x]):
                    if y not in adj[x]:
                        continue
                    cands = adj[x] - {y}
                    if len(cands) < depth:
                        continue
                    any_tested = True
                    try_remove(x, y, cands, depth)
            if not any_tested:
                break
            depth += 1

        # Possible-D-Sep stage on the graph with its unshielded colliders marked
        within = frozenset(vs)
        marked = _orient_colliders_only(vs, adj, sepset, within)
        pds = {x: _possible_dsep(adj, marked, x) for x in vs}
        for x in vs:
            for y in sorted(adj[x]):
                if y not in adj[x]:
                    continue
                for base in (pds[x] - {y}, pds[y] - {x}):
                    top = min(len(base), limit)
                    removed = False
                    for size in range(top + 1):
                        if try_remove(x, y, base, size):
                            removed = True
                            break
                    if removed:
                        break

        skeleton = _graph_from_adj(vs, adj)
        for a, b, _, _ in skeleton.edges():
            ip.add(a, b, vs)
        locals_.append(_orient_local(skeleton, sepset, within))

    global_adj = {v: set(variables) - {v} for v in variables}
    for x, y in sepset.pairs():
        global_adj[x].discard(y)
        global_adj[y].discard(x)
    skeleton = _graph_from_adj(variables, global_adj)
    global_graph = _orient_global(skeleton, sepset, vsets)
    return Part1Output(variables, vsets, global_graph, locals_, sepset, ip, len(tests.cache))


def _orient_colliders_only(vs, adj, sepset: SepSet, within) -> MixedGraph:
    skeleton = _graph_from_adj(vs, adj)
    names = skeleton.nodes
    pm = [[Mark.CIRCLE if x != Mark.NONE else Mark.NONE for x in row] for row in skeleton.matrix]
    for a, c, b in unshielded_triples(skeleton):
        if sepset.collider_status(names[a], names[b], names[c], within) is True:
            pm[a][c] = pm[b][c] = Mark.ARROW
    return MixedGraph.from_matrix(names, pm)


def _orient_global(skeleton: MixedGraph, sepset: SepSet, vsets) -> MixedGraph:
    names = skeleton.nodes
    sets = [frozenset(v) for v in vsets]
    colliders = []
    for a, c, b in unshielded_triples(skeleton):
        trio = {names[a], names[b], names[c]}
        if any(trio <= v for v in sets) and sepset.collider_status(names[a], names[b], names[c]) is True:
            colliders.append((a, c, b))
    try:
        return orient(skeleton, colliders)
    except OrientationConflict:
        return skeleton


def _check_connected_overlap(vsets) -> None:
    sets = [set(v) for v in vsets]
    reached = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j, other in enumerate(sets):
            if j not in reached and sets[i] & other:
                reached.add(j)
                frontier.append(j)
    if len(reached) != len(sets):
        raise InputError("the datasets' variable sets do not form a connected overlap structure")


# ------------------------------------------------------------------ part 2
@dataclass
class Candidate:
    """A Markov class surviving the search, restricted to its consistent members."""

    pag: MixedGraph
    members: list[MixedGraph]
    removed: tuple[tuple[str, str], ...] = ()
    colliders: tuple[tuple[str, str, str], ...] = ()

    @property
    def key(self) -> str:
        return self.pag.key()


@dataclass
class SearchStats:
    removable: int = 0
    removal_subsets: int = 0
    orientation_attempts: int = 0
    mags_checked: int = 0
    immorality_candidates: int = 0
    forced_colliders: int = 0
    elapsed: float = 0.0
    complete: bool = True


@dataclass
class Budget:
    seconds: float | None = None
    max_mags: int | None = None

    def deadline(self) -> float | None:
        return None if self.seconds is None else time.monotonic() + self.seconds


class _Problem:
    """Index-level view of a part-1 result for the search loops."""

    def __init__(self, p1: Part1Output, store: CausalStore | None):
        g = p1.global_graph
        self.g = g
        self.names = g.nodes
        self.n = len(g)
        self.full = (1 << self.n) - 1
        self.adj = list(g.adj_masks)
        self.fixed = {}
        if store is not None:
            for (a, b), m in store.fixed_marks(g).items():
                self.fixed[(g.index(a), g.index(b))] = m
        self.sep_checks = []
        self.recorded: set[tuple[int, int]] = set()
        self.sepset = p1.sepset
        for (x, y), recs in p1.sepset.items():
            i, j = g.index(x), g.index(y)
            self.recorded |= {(i, j), (j, i)}
            for r in recs:
                self.sep_checks.append((i, j, g.mask(r.sepset)))
        self.ip_checks = []
        for (x, y), vs in p1.ip:
            self.ip_checks.append((g.index(x), g.index(y), self.full & ~g.mask(vs)))
        self.p1 = p1

    def status(self, a: int, b: int, c: int) -> bool | None:
        return self.sepset.collider_status(self.names[a], self.names[b], self.names[c])

    def decide(self, theta, alpha, beta, gamma):
        return self.status(theta, gamma, beta)


def _path_through(adj: list[int], x: int, y: int, hidden: int) -> bool:
    """Some node of ``hidden`` reaches x avoiding y and reaches y avoiding x in ``adj``.

    Necessary for an x-y path with a hidden interior node; ``adj`` must
    already lack the x-y edge.
    """
    if not hidden:
        return False
    return bool(_reach_excluding(adj, x, y) & _reach_excluding(adj, y, x) & hidden)


def _reach_excluding(adj: list[int], src: int, other: int) -> int:
    seen = 1 << src
    frontier = seen
    while frontier:
        nxt = 0
        for v in _bits(frontier):
            nxt |= adj[v]
        nxt &= ~seen & ~(1 << other)
        seen |= nxt
        frontier = nxt
    return seen


def candidate_edge_removals(p1: Part1Output) -> list[tuple[str, str]]:
    """Global edges that some consistent MAG might lack.

    An edge is kept out only when a dataset measuring both endpoints found
    them inseparable and no path around the edge passes through a variable
    that dataset did not measure, so no inducing path could replace it.
    """
    g = p1.global_graph
    adj = list(g.adj_masks)
    full = (1 << len(g)) - 1
    needs = {}
    for (x, y), vs in p1.ip:
        needs.setdefault((x, y), []).append(full & ~g.mask(vs))
    out = []
    for a, b, _, _ in g.edges():
        i, j = g.index(a), g.index(b)
        pruned = list(adj)
        pruned[i] &= ~(1 << j)
        pruned[j] &= ~(1 << i)
        if all(_path_through(pruned, i, j, hidden) for hidden in needs.get((a, b), [])):
            out.append((a, b))
    return out


def _powerset(items: Sequence) -> Iterator[tuple]:
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def classify_triples(prob: _Problem, adj: list[int]):
    """Split the unshielded triples of a skeleton into forced colliders and free choices.

    Returns ``None`` when recorded separations and fixed marks contradict,
    including a middle node that lies in some but not all recorded sets of
    its pair (it would have to be a collider and a non-collider).
    """
    forced: list[tuple[int, int, int]] = []
    free: list[tuple[int, int, int]] = []
    fx = prob.fixed
    for c in range(prob.n):
        nb = list(_bits(adj[c]))
        for p, a in enumerate(nb):
            for b in nb[p + 1:]:
                if adj[a] >> b & 1:
                    continue
                st = prob.status(a, b, c)
                if st is None and (a, b) in prob.recorded:
                    return None
                ma, mb = fx.get((a, c)), fx.get((b, c))
                if ma == Mark.TAIL or mb == Mark.TAIL:
                    if st is True:
                        return None
                    continue
                if ma == Mark.ARROW and mb == Mark.ARROW:
                    if st is False:
                        return None
                    forced.append((a, c, b))
                    continue
                if st is True:
                    forced.append((a, c, b))
                elif st is None:
                    free.append((a, c, b))
    return forced, free


def candidate_immoralities(p1: Part1Output, store: CausalStore | None = None) -> list[tuple[str, str, str]]:
    """Free collider choices on the global graph: unshielded triples that neither
    recorded separations nor fixed marks decide."""
    prob = _Problem(p1, store)
    split = classify_triples(prob, prob.adj)
    if split is None:
        return []
    names = prob.names
    return [(names[a], names[c], names[b]) for a, c, b in split[1]]


_TAIL, _ARROW = Mark.TAIL, Mark.ARROW


def _possible_ancestors(pm, nbrs, targets: int) -> int:
    """Nodes with a possibly directed path into ``targets`` (circles may become tails or arrows)."""
    out = targets
    stack = [v for v in range(len(nbrs)) if targets >> v & 1]
    while stack:
        b = stack.pop()
        row = pm[b]
        for a in nbrs[b]:
            if not out >> a & 1 and pm[a][b] != _TAIL and row[a] != _ARROW:
                out |= 1 << a
                stack.append(a)
    return out


def _definite_ancestors(pm, nbrs, targets: int) -> int:
    """Nodes with a path of tail-arrow edges into ``targets``."""
    out = targets
    stack = [v for v in range(len(nbrs)) if targets >> v & 1]
    while stack:
        b = stack.pop()
        row = pm[b]
        for a in nbrs[b]:
            if not out >> a & 1 and row[a] == _TAIL and pm[a][b] == _ARROW:
                out |= 1 << a
                stack.append(a)
    return out


class _Pruner:
    """Rejects partial orientations in which no completion can pass the checks.

    A recorded separation fails in every completion when a walk of
    definite non-colliders outside the set joins the pair; a required
    inducing path is impossible when no walk through possible colliders
    that may be ancestors of an endpoint (or hidden nodes) joins the pair.
    """

    def __init__(self, prob: _Problem, adj: list[int], colliders: Iterable[tuple[int, int, int]]):
        self.adj = adj
        self.nbrs = [list(_bits(m)) for m in adj]
        self.colliders = {(min(a, b), c, max(a, b)) for a, c, b in colliders}
        self.sep_checks = prob.sep_checks
        self.ip_checks = [(x, y, h) for x, y, h in prob.ip_checks if not adj[x] >> y & 1]

    def connected(self, pm, x: int, y: int, smask: int) -> bool:
        adj, nbrs, colliders = self.adj, self.nbrs, self.colliders
        sanc = _definite_ancestors(pm, nbrs, smask)
        start = [(x, v) for v in nbrs[x]]
        seen = set(start)
        stack = start
        while stack:
            u, v = stack.pop()
            in_s = smask >> v & 1
            for w in nbrs[v]:
                if w == u:
                    continue
                if pm[u][v] == _ARROW and pm[w][v] == _ARROW:
                    # definite collider: open iff in An(S)
                    if not sanc >> v & 1:
                        continue
                elif in_s:
                    continue
                elif not (pm[u][v] == _TAIL or pm[w][v] == _TAIL):
                    # possible collider unless unshielded and unlisted
                    if adj[u] >> w & 1 or (min(u, w), v, max(u, w)) in colliders:
                        continue
                if w == y:
                    return True
                if (v, w) in seen:
                    continue
                seen.add((v, w))
                stack.append((v, w))
        return False

    def may_induce(self, pm, x: int, y: int, hidden: int) -> bool:
        adj, nbrs, colliders = self.adj, self.nbrs, self.colliders
        anc = _possible_ancestors(pm, nbrs, (1 << x) | (1 << y))
        start = [(x, v) for v in nbrs[x]]
        seen = set(start)
        stack = start
        while stack:
            u, v = stack.pop()
            if v == y:
                return True
            visible = not hidden >> v & 1
            # every inner node lies in An({x, y}); visible ones are colliders
            if not anc >> v & 1 or visible and pm[u][v] == _TAIL:
                continue
            for w in nbrs[v]:
                if w == u or (v, w) in seen:
                    continue
                # possible collider at v
                if visible and (
                    pm[w][v] == _TAIL
                    or (not adj[u] >> w & 1 and (min(u, w), v, max(u, w)) not in colliders)
                ):
                    continue
                seen.add((v, w))
                stack.append((v, w))
        return False

    def __call__(self, pm) -> bool:
        for x, y, z in self.sep_checks:
            if self.connected(pm, x, y, z):
                return True
        for x, y, h in self.ip_checks:
            if not self.may_induce(pm, x, y, h):
                return True
        return False


def _passes(prob: _Problem, mag: MixedGraph, removed: Sequence[tuple[int, int]] = ()) -> bool:
    """Recorded separations hold, required inducing paths exist, and removed pairs stay non-adjacent in every marginal."""
    for x, y, z in prob.sep_checks:
        if _connected(mag, x, y, z):
            return False
    for x, y, hidden in prob.ip_checks:
        if not inducing_path_fast(mag, x, y, hidden):
            return False
    # separated pairs cannot carry an inducing path; only removed pairs need the maximality check
    return not any(_collider_path(mag, i, j) for i, j in removed)


def marginals_match(p1: Part1Output, mag: MixedGraph) -> bool:
    """Every dataset's marginal of ``mag`` has that dataset's local PAG."""
    for vs, local in zip(p1.variable_sets, p1.local_graphs):
        if mag_to_pag(marginalize(mag, vs)) != local:
            return False
    return True


def iod_part2(
    p1: Part1Output,
    store: CausalStore | None = None,
    *,
    budget: Budget | None = None,
    check_marginals: bool = False,
    removal_candidates: Sequence[tuple[str, str]] | None = None,
    stats: SearchStats | None = None,
    shard: tuple[int, int] = (0, 1),
) -> list[Candidate]:
    """Search removal subsets and collider choices; return the consistent classes.

    Removal subsets are visited by size, then lexicographically; within a
    subset, collider choices likewise.  ``store`` contributes fixed
    endpoint marks.  ``shard = (k, m)`` restricts the search to removal
    subsets whose position is ``k`` modulo ``m``.
    """
    budget = budget or Budget()
    stats = stats if stats is not None else SearchStats()
    started = time.monotonic()
    deadline = budget.deadline()
    prob = _Problem(p1, store)
    g = prob.g
    removable = (
        candidate_edge_removals(p1) if removal_candidates is None else list(removal_candidates)
    )
    stats.removable = len(removable)
    rem_idx = [(g.index(a), g.index(b)) for a, b in removable]
    fixed = sorted((a, b, m) for (a, b), m in prob.fixed.items())
    ip_by_pair: dict[tuple[int, int], list[int]] = {}
    for x, y, hidden in prob.ip_checks:
        ip_by_pair.setdefault((min(x, y), max(x, y)), []).append(hidden)

    base = classify_triples(prob, prob.adj)
    if base is not None:
        stats.immorality_candidates = len(base[1])
        stats.forced_colliders = len(base[0])

    found: dict[str, Candidate] = {}
    total = 0
    names = g.nodes

    def out_of_budget(pending: int = 0) -> bool:
        if deadline is not None and time.monotonic() > deadline:
            return True
        return budget.max_mags is not None and total + pending >= budget.max_mags

    def stop():
        stats.complete = False
        stats.elapsed = time.monotonic() - started
        raise BudgetExceeded("search budget exhausted", _sorted(found))

    def flush(groups, removed, colliders):
        nonlocal total
        for key, members in groups.items():
            if check_marginals and not marginals_match(p1, members[0]):
                continue
            found[key] = Candidate(
                pag=mark_intersection(members),
                members=members,
                removed=tuple((names[i], names[j]) for i, j in removed),
                colliders=tuple((names[a], names[c], names[b]) for a, c, b in colliders),
            )
            total += len(members)

    k_shard, m_shard = shard
    for position, removed in enumerate(_powerset(rem_idx)):
        if position % m_shard != k_shard:
            continue
        if out_of_budget():
            stop()
        stats.removal_subsets += 1
        adj = list(prob.adj)
        for i, j in removed:
            adj[i] &= ~(1 << j)
            adj[j] &= ~(1 << i)
        if any(
            not _path_through(adj, i, j, hidden)
            for i, j in removed
            for hidden in ip_by_pair.get((min(i, j), max(i, j)), [])
        ):
            continue
        split = classify_triples(prob, adj)
        if split is None:
            continue
        forced, free = split
        skeleton = _skeleton(names, adj)
        live_fixed = [(a, b, m) for a, b, m in fixed if adj[a] >> b & 1]
        for chosen in _powerset(free):
            if out_of_budget():
                stop()
            colliders = sorted(forced + list(chosen))
            pruner = _Pruner(prob, adj, colliders)
            if pruner(_with_arrowheads(skeleton, colliders, live_fixed)):
                continue
            stats.orientation_attempts += 1
            try:
                pag = orient(skeleton, colliders, live_fixed, prob.decide)
            except OrientationConflict:
                continue
            if pruner(pag.matrix):
                continue
            groups: dict[str, list[MixedGraph]] = {}
            pending = 0
            for mag in completions(pag, colliders, maximal_pairs=(), reject=pruner):
                stats.mags_checked += 1
                if stats.mags_checked % 256 == 0 and out_of_budget(pending):
                    # partial classes are reported with the members found so far
                    flush(groups, removed, colliders)
                    stop()
                if not _passes(prob, mag, removed):
                    continue
                groups.setdefault(mag_to_pag(mag).key(), []).append(mag)
                pending += 1
            flush(groups, removed, colliders)
    stats.elapsed = time.monotonic() - started
    return _sorted(found)


def _with_arrowheads(skeleton: MixedGraph, colliders, fixed) -> list[list[Mark]]:
    pm = [list(row) for row in skeleton.matrix]
    for a, c, b in colliders:
        pm[a][c] = pm[b][c] = Mark.ARROW
    for a, b, m in fixed:
        pm[a][b] = m
    return pm


def _skeleton(names, adj) -> MixedGraph:
    n = len(names)
    m = [[Mark.CIRCLE if adj[i] >> j & 1 else Mark.NONE for j in range(n)] for i in range(n)]
    return MixedGraph.from_matrix(names, m)


def _sorted(found: dict[str, Candidate]) -> list[Candidate]:
    return [found[k] for k in sorted(found)]


def run_part2_parallel(
    p1: Part1Output,
    store: CausalStore | None,
    jobs: int,
    budget: Budget | None = None,
    check_marginals: bool = False,
) -> list[Candidate]:
    """``iod_part2`` split over ``jobs`` worker processes; output equals the serial run."""
    if jobs <= 1:
        return iod_part2(p1, store, budget=budget, check_marginals=check_marginals)
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _shard_worker, p1, store, budget, check_marginals, (k, jobs)
            )
            for k in range(jobs)
        ]
        merged: dict[str, Candidate] = {}
        partial = False
        for f in futures:
            cands, exhausted = f.result()
            partial |= exhausted
            for c in cands:
                merged[c.key] = c
    result = _sorted(merged)
    if partial:
        raise BudgetExceeded("search budget exhausted", result)
    return result


def _shard_worker(p1, store, budget, check_marginals, shard):
    try:
        return iod_part2(p1, store, budget=budget, check_marginals=check_marginals, shard=shard), False
    except BudgetExceeded as exc:
        return exc.partial, True


def all_mags(candidates: Iterable[Candidate]) -> list[MixedGraph]:
    return [m for c in candidates for m in c.members]


def markov_classes_equal(a: MixedGraph, b: MixedGraph) -> bool:
    return markov_equivalent(a, b)
