"""Orientation of partial ancestral graphs and enumeration of their members.

The rule engine works on a mutable mark matrix.  Unshielded colliders and
background marks are written first, then the propagation rules run to a
fixed point.  Rules that need undirected (selection) edges are not used.

Collider decisions on discriminating paths are delegated to a callback
``decide(theta, alpha, beta, gamma) -> True | False | None`` over node
indices: ``True`` for a collider at ``beta``, ``False`` for a non-collider,
``None`` to leave the path alone.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field

from .graph import (
    GraphError,
    Mark,
    MixedGraph,
    _bits,
    _closure,
    _collider_path,
    is_maximal,
    unshielded_triples,
)

A, T, C, N = Mark.ARROW, Mark.TAIL, Mark.CIRCLE, Mark.NONE

Decider = Callable[[int, int, int, int], "bool | None"]


class OrientationConflict(GraphError):
    """A mark was forced to two different values."""


@dataclass(frozen=True)
class OrientationContext:
    """Input to :func:`complete_pag`.

    ``skeleton`` supplies adjacencies only (its marks are ignored).
    ``immoralities`` holds label triples ``(x, z, y)`` with collider ``z``.
    ``fixed_marks`` maps ``(a, b)`` to the mark at ``b`` on the edge ``a - b``.
    ``sepsets`` is anything with ``collider_status(x, y, z)`` returning a
    bool or ``None``; it decides discriminating paths.
    """

    skeleton: MixedGraph
    immoralities: frozenset = frozenset()
    sepsets: object | None = None
    fixed_marks: Mapping[tuple[str, str], Mark] = field(default_factory=dict)


def _set(pm, a: int, b: int, mark: Mark) -> bool:
    cur = pm[a][b]
    if cur == mark:
        return False
    if cur != C:
        raise OrientationConflict(f"mark at node {b} on edge {a}-{b} is {cur.name}, wanted {mark.name}")
    pm[a][b] = mark
    return True


def _adj_masks(pm) -> list[int]:
    return [sum(1 << j for j, x in enumerate(row) if x != N) for row in pm]


# ------------------------------------------------------------------- rules
def _rule1(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for b in range(n):
        for a in _bits(adj[b]):
            if pm[a][b] != A:
                continue
            for c in _bits(adj[b] & ~adj[a] & ~(1 << a)):
                if pm[c][b] == C:
                    changed |= _set(pm, c, b, T)
                    changed |= _set(pm, b, c, A)
    return changed


def _rule2(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for a in range(n):
        for c in _bits(adj[a]):
            if pm[a][c] != C:
                continue
            for b in _bits(adj[a] & adj[c]):
                chain1 = pm[a][b] == A and pm[b][a] == T and pm[b][c] == A
                chain2 = pm[a][b] == A and pm[b][c] == A and pm[c][b] == T
                if chain1 or chain2:
                    changed |= _set(pm, a, c, A)
                    break
    return changed


def _rule3(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for b in range(n):
        into_b = [a for a in _bits(adj[b]) if pm[a][b] == A]
        for t in _bits(adj[b]):
            if pm[t][b] != C:
                continue
            hit = False
            for i, a in enumerate(into_b):
                if a == t or pm[a][t] != C:
                    continue
                for c in into_b[i + 1:]:
                    if c == t or adj[a] >> c & 1 or pm[c][t] != C:
                        continue
                    if adj[t] >> a & 1 and adj[t] >> c & 1:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                changed |= _set(pm, t, b, A)
    return changed


def _discriminating_from(pm, adj, beta: int, gamma: int) -> Iterator[tuple[int, int]]:
    """Yield ``(theta, alpha)`` for discriminating paths ``theta ... alpha, beta, gamma``."""

    def parent_of_gamma(v: int) -> bool:
        return pm[v][gamma] == A and pm[gamma][v] == T

    for alpha in _bits(adj[beta]):
        if alpha == gamma or pm[beta][alpha] != A or not parent_of_gamma(alpha):
            continue
        # breadth-first over collider chains ending at alpha
        frontier = [(alpha, (1 << alpha) | (1 << beta) | (1 << gamma))]
        found = None
        while frontier and found is None:
            nxt = []
            for head, used in frontier:
                for w in _bits(adj[head] & ~used):
                    if pm[w][head] != A:
                        continue
                    if not adj[w] >> gamma & 1:
                        found = w
                        break
                    if parent_of_gamma(w) and pm[head][w] == A:
                        nxt.append((w, used | (1 << w)))
                if found is not None:
                    break
            frontier = nxt
        if found is not None:
            yield found, alpha


def _rule4(pm, adj, decide: Decider | None) -> bool:
    if decide is None:
        return False
    changed = False
    n = len(pm)
    for gamma in range(n):
        for beta in _bits(adj[gamma]):
            if pm[gamma][beta] != C:
                continue
            for theta, alpha in _discriminating_from(pm, adj, beta, gamma):
                verdict = decide(theta, alpha, beta, gamma)
                if verdict is None:
                    continue
                if verdict:
                    changed |= _set(pm, alpha, beta, A)
                    changed |= _set(pm, gamma, beta, A)
                    changed |= _set(pm, beta, gamma, A)
                else:
                    changed |= _set(pm, gamma, beta, T)
                    changed |= _set(pm, beta, gamma, A)
                break
    return changed


def _pd_edge(pm, u: int, v: int) -> bool:
    """Edge ``u - v`` is potentially directed from ``u`` to ``v``."""
    return pm[v][u] != A and pm[u][v] != T


def _updp_first_steps(pm, adj, start: int, target: int, avoid: int) -> set[int]:
    """Second nodes of uncovered potentially directed paths ``start ... target``."""
    firsts: set[int] = set()

    def reach(prev: int, cur: int, visited: int) -> bool:
        for nxt in _bits(adj[cur] & ~visited):
            if adj[prev] >> nxt & 1 or not _pd_edge(pm, cur, nxt):
                continue
            if nxt == target or reach(cur, nxt, visited | (1 << nxt)):
                return True
        return False

    base = (1 << start) | avoid
    for mu in _bits(adj[start] & ~avoid):
        if not _pd_edge(pm, start, mu):
            continue
        if mu == target or reach(start, mu, base | (1 << mu)):
            firsts.add(mu)
    return firsts


def _rule8(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for a in range(n):
        for c in _bits(adj[a]):
            if not (pm[c][a] == C and pm[a][c] == A):
                continue
            for b in _bits(adj[a] & adj[c]):
                b_to_c = pm[b][c] == A and pm[c][b] == T
                a_to_b = pm[b][a] == T and pm[a][b] in (A, C)
                if b_to_c and a_to_b:
                    changed |= _set(pm, c, a, T)
                    break
    return changed


def _rule9(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for a in range(n):
        for c in _bits(adj[a]):
            if not (pm[c][a] == C and pm[a][c] == A):
                continue
            firsts = _updp_first_steps(pm, adj, a, c, 0)
            if any(not adj[b] >> c & 1 and b != c for b in firsts):
                changed |= _set(pm, c, a, T)
    return changed


def _rule10(pm, adj) -> bool:
    changed = False
    n = len(pm)
    for a in range(n):
        for c in _bits(adj[a]):
            if not (pm[c][a] == C and pm[a][c] == A):
                continue
            parents = [
                b for b in _bits(adj[c]) if b != a and pm[b][c] == A and pm[c][b] == T
            ]
            if len(parents) < 2:
                continue
            steps = [_updp_first_steps(pm, adj, a, b, 1 << c) for b in parents]
            hit = False
            for i in range(len(parents)):
                for j in range(i + 1, len(parents)):
                    for mu in steps[i]:
                        for om in steps[j]:
                            if mu != om and not adj[mu] >> om & 1:
                                hit = True
                                break
                        if hit:
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                changed |= _set(pm, c, a, T)
    return changed


def run_rules(pm, decide: Decider | None = None) -> None:
    """Apply the propagation rules in place until nothing changes."""
    adj = _adj_masks(pm)
    while True:
        changed = _rule1(pm, adj)
        changed |= _rule2(pm, adj)
        changed |= _rule3(pm, adj)
        changed |= _rule4(pm, adj, decide)
        if changed:
            continue
        changed = _rule8(pm, adj) | _rule9(pm, adj) | _rule10(pm, adj)
        if not changed:
            return


def orient(
    skeleton: MixedGraph,
    colliders: Iterable[tuple[int, int, int]] = (),
    fixed: Iterable[tuple[int, int, Mark]] = (),
    decide: Decider | None = None,
) -> MixedGraph:
    """Index-level entry point: circles on ``skeleton``, then fixed marks, colliders and rules."""
    n = len(skeleton)
    adj = skeleton.adj_masks
    pm = [[C if adj[i] >> j & 1 else N for j in range(n)] for i in range(n)]
    for a, b, mark in fixed:
        if not adj[a] >> b & 1:
            raise GraphError(f"fixed mark on missing edge {skeleton.nodes[a]}-{skeleton.nodes[b]}")
        _set(pm, a, b, Mark(mark))
    for a, c, b in colliders:
        if not (adj[a] >> c & 1 and adj[b] >> c & 1) or adj[a] >> b & 1 or a == b:
            names = skeleton.nodes
            raise GraphError(f"({names[a]}, {names[c]}, {names[b]}) is not an unshielded triple")
        _set(pm, a, c, A)
        _set(pm, b, c, A)
    run_rules(pm, decide)
    return MixedGraph.from_matrix(skeleton.nodes, pm)


def _sepset_decider(g: MixedGraph, sepsets) -> Decider | None:
    if sepsets is None:
        return None
    names = g.nodes

    def decide(theta, alpha, beta, gamma):
        return sepsets.collider_status(names[theta], names[gamma], names[beta])

    return decide


def complete_pag(ctx: OrientationContext) -> MixedGraph:
    """Orient every mark implied by the context; undecided marks stay circles.

    Raises :class:`OrientationConflict` when the constraints contradict
    each other.
    """
    g = ctx.skeleton
    colliders = [(g.index(x), g.index(z), g.index(y)) for x, z, y in ctx.immoralities]
    fixed = [(g.index(a), g.index(b), m) for (a, b), m in ctx.fixed_marks.items()]
    return orient(g, sorted(colliders), sorted(fixed), _sepset_decider(g, ctx.sepsets))


def mag_to_pag(g: MixedGraph) -> MixedGraph:
    """The partial ancestral graph of the Markov equivalence class of ``g``."""
    m = g.matrix
    colliders = [
        (a, c, b) for a, c, b in unshielded_triples(g) if m[a][c] == A and m[b][c] == A
    ]

    def decide(theta, alpha, beta, gamma):
        return m[alpha][beta] == A and m[gamma][beta] == A

    return orient(g, colliders, (), decide)


# ------------------------------------------------------------- enumeration
_OPTIONS = ((T, A), (A, T), (A, A))


def completions(
    p: MixedGraph,
    colliders: Iterable[tuple[int, int, int]] | None = None,
    maximal_pairs: Iterable[tuple[int, int]] | None = None,
    reject: Callable[[list[list[Mark]]], bool] | None = None,
) -> Iterator[MixedGraph]:
    """Valid MAGs obtained by replacing every circle of ``p``.

    Edges are filled in ``(i, j)`` row-major order; for each edge the
    options are tried as ``i -> j``, ``i <- j``, ``i <-> j`` (tail before
    arrow at the first endpoint).  Unshielded triples must be colliders
    exactly when listed in ``colliders``; by default the listed set is the
    triples that already carry two arrowheads in ``p``.

    With ``maximal_pairs``, maximality is checked for those non-adjacent
    pairs only and the caller vouches for the rest.  ``reject`` is called
    on the partial mark matrix after every assignment; returning true
    abandons that branch.
    """
    n = len(p)
    pm = [list(row) for row in p.matrix]
    adj = p.adj_masks
    triples = list(unshielded_triples(p))
    if colliders is None:
        want = {(a, c, b) for a, c, b in triples if pm[a][c] == A and pm[b][c] == A}
    else:
        want = {(min(a, b), c, max(a, b)) for a, c, b in colliders}

    open_edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i] >> j & 1 and (pm[i][j] == C or pm[j][i] == C):
                open_edges.append((i, j))
    position = {e: k for k, e in enumerate(open_edges)}

    def decided_after(e) -> int:
        return position.get(e, -1)

    # each triple is checked once, right after the later of its two edges is fixed
    checks: list[list[tuple[int, int, int]]] = [[] for _ in open_edges]
    initial = []
    for a, c, b in triples:
        k = max(decided_after((min(a, c), max(a, c))), decided_after((min(b, c), max(b, c))))
        (checks[k] if k >= 0 else initial).append((a, c, b))
    for a, c, b in initial:
        if (pm[a][c] == A and pm[b][c] == A) != ((a, c, b) in want):
            return

    parents = [0] * n
    bidirected = []
    for i in range(n):
        for j in _bits(adj[i]):
            if pm[i][j] == A and pm[j][i] == T:
                parents[j] |= 1 << i
            elif i < j and pm[i][j] == A and pm[j][i] == A:
                bidirected.append((i, j))
    anc = _closure_list(parents)
    if any(anc[i] >> i & 1 for i in range(n)):
        return
    if any(anc[i] >> j & 1 or anc[j] >> i & 1 for i, j in bidirected):
        return

    names = p.nodes
    index = {v: i for i, v in enumerate(names)}
    pairs = None if maximal_pairs is None else list(maximal_pairs)

    def rec(k: int, anc: list[int], bidi: list[tuple[int, int]]):
        if k == len(open_edges):
            g = MixedGraph._trusted(names, index, pm, {"anc": tuple(anc), "adj": adj})
            if pairs is None:
                if is_maximal(g):
                    yield g
            elif not any(_collider_path(g, i, j) for i, j in pairs):
                yield g
            return
        i, j = open_edges[k]
        old_i, old_j = pm[j][i], pm[i][j]
        for mark_i, mark_j in _OPTIONS:
            if old_i != C and old_i != mark_i:
                continue
            if old_j != C and old_j != mark_j:
                continue
            pm[j][i], pm[i][j] = mark_i, mark_j
            ok = True
            for a, c, b in checks[k]:
                if (pm[a][c] == A and pm[b][c] == A) != ((a, c, b) in want):
                    ok = False
                    break
            if ok and reject is not None and reject(pm):
                ok = False
            if ok:
                new_anc, new_bidi = _extend(anc, bidi, i, j, mark_i, mark_j)
                if new_anc is not None:
                    yield from rec(k + 1, new_anc, new_bidi)
        pm[j][i], pm[i][j] = old_i, old_j

    yield from rec(0, anc, bidirected)


def _closure_list(parents: list[int]) -> list[int]:
    return list(_closure(parents))


def _extend(anc, bidi, i, j, mark_i, mark_j):
    """Add an oriented edge; return updated ancestor masks and bidirected list, or ``None`` on a violation."""
    if mark_i == A and mark_j == A:
        if anc[i] >> j & 1 or anc[j] >> i & 1:
            return None, None
        return anc, bidi + [(i, j)]
    src, dst = (i, j) if mark_j == A else (j, i)
    if anc[src] >> dst & 1:
        return None, None
    if anc[dst] >> src & 1:
        return anc, bidi
    gain = anc[src] | (1 << src)
    new = list(anc)
    n = len(anc)
    for v in range(n):
        if v == dst or anc[v] >> dst & 1:
            new[v] |= gain
    for a, b in bidi:
        if new[a] >> b & 1 or new[b] >> a & 1:
            return None, None
    return new, bidi


def _refines(q: MixedGraph, p: MixedGraph) -> bool:
    """Every non-circle mark of ``q`` is present in ``p``."""
    return all(
        x == C or x == y for rq, rp in zip(q.matrix, p.matrix) for x, y in zip(rq, rp)
    )


def enumerate_mags(p: MixedGraph) -> list[MixedGraph]:
    """MAGs completing ``p`` whose class PAG agrees with every mark of ``p`` it fixes.

    For a PAG this is its Markov equivalence class; for a circle-free MAG
    it is the MAG itself.  Order follows :func:`completions`.
    """
    return [g for g in completions(p) if _refines(mag_to_pag(g), p)]


def pag_to_mag(p: MixedGraph) -> MixedGraph:
    """A representative MAG of ``p``: the first member in completion order.

    When no completion qualifies as a member (``p`` fixes marks that its
    completions' classes leave open), the first valid completion is used.
    """
    first = None
    for g in completions(p):
        if first is None:
            first = g
        if _refines(mag_to_pag(g), p):
            return g
    if first is None:
        raise OrientationConflict(f"no valid MAG completes {p.to_text()}")
    return first


def mark_intersection(graphs: Iterable[MixedGraph]) -> MixedGraph:
    """Graph keeping the marks shared by every input; differing marks become circles."""
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph")
    base = [list(row) for row in graphs[0].matrix]
    for g in graphs[1:]:
        if g.nodes != graphs[0].nodes or g.adj_masks != graphs[0].adj_masks:
            raise GraphError("mark intersection needs graphs over one skeleton")
        for i, row in enumerate(g.matrix):
            for j, x in enumerate(row):
                if base[i][j] != x:
                    base[i][j] = C
    return MixedGraph.from_matrix(graphs[0].nodes, base)
