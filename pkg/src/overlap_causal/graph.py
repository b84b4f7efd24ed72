"""Mixed graphs over labelled nodes and the separation calculus on them.

A graph stores a dense mark matrix ``m`` where ``m[i][j]`` is the mark at
node ``j`` on the edge between ``i`` and ``j`` (``Mark.NONE`` when the two
nodes are not adjacent).  Node labels are kept in lexicographic order, so the
integer index of a label is stable and every iteration order is
deterministic.

Graphs are immutable values.  Derived bitmask tables (parents, ancestors,
arrowheads) are computed lazily and cached on the instance.
"""

from __future__ import annotations

import enum
import json
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from typing import Any


class Mark(enum.IntEnum):
    """Endpoint mark of an edge."""

    NONE = 0
    CIRCLE = 1
    ARROW = 2
    TAIL = 3


class MutilationMode(enum.Enum):
    REMOVE_INCOMING = "incoming"
    REMOVE_OUTGOING = "outgoing"


class GraphError(ValueError):
    """Raised on malformed graphs or violated call preconditions."""


_MARK_NAMES = {Mark.TAIL: "tail", Mark.ARROW: "arrow", Mark.CIRCLE: "circle"}
_MARK_BY_NAME = {v: k for k, v in _MARK_NAMES.items()}
_EDGE_TOKEN = re.compile(r"^(<|o)?-(>|o)?$")


_TABLE_BITS = 10
_BIT_TABLE = tuple(
    tuple(i for i in range(_TABLE_BITS) if m >> i & 1) for m in range(1 << _TABLE_BITS)
)


def _bits(mask: int) -> Sequence[int]:
    """Indices of the set bits of ``mask``, ascending."""
    if mask < 1 << _TABLE_BITS:
        return _BIT_TABLE[mask]
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class MixedGraph:
    """Immutable mixed graph with tail, arrow and circle endpoint marks.

    Parameters
    ----------
    nodes : iterable of str
        Node labels.  They are sorted; duplicates are rejected.
    edges : iterable of (a, b, mark_at_a, mark_at_b), optional
        Edges given by their two endpoints and endpoint marks.

    Examples
    --------
    >>> g = MixedGraph.parse("X -> Y; Y <-> Z")
    >>> g.is_directed("X", "Y"), g.is_bidirected("Y", "Z")
    (True, True)
    """

    __slots__ = ("_nodes", "_index", "_m", "_cache")

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple] = ()):
        labels = tuple(sorted(nodes))
        if len(set(labels)) != len(labels):
            raise GraphError(f"duplicate node labels in {labels}")
        index = {v: i for i, v in enumerate(labels)}
        n = len(labels)
        m = [[Mark.NONE] * n for _ in range(n)]
        for a, b, mark_a, mark_b in edges:
            if a not in index or b not in index:
                raise GraphError(f"edge {a}-{b} has an endpoint outside the node set")
            i, j = index[a], index[b]
            if i == j:
                raise GraphError(f"self-loop at {a}")
            mark_a, mark_b = Mark(mark_a), Mark(mark_b)
            if Mark.NONE in (mark_a, mark_b):
                raise GraphError(f"edge {a}-{b} needs two endpoint marks")
            if m[i][j] != Mark.NONE:
                raise GraphError(f"more than one edge between {a} and {b}")
            m[j][i] = mark_a
            m[i][j] = mark_b
        self._init(labels, index, tuple(tuple(row) for row in m))

    def _init(self, labels, index, m):
        self._nodes = labels
        self._index = index
        self._m = m
        self._cache = {}

    @classmethod
    def from_matrix(cls, nodes: Sequence[str], matrix) -> "MixedGraph":
        """Build from a sorted label tuple and a mark matrix (``m[i][j]`` = mark at ``j``)."""
        labels = tuple(nodes)
        if list(labels) != sorted(labels):
            raise GraphError("from_matrix expects labels in sorted order")
        n = len(labels)
        rows = tuple(tuple(Mark(x) for x in row) for row in matrix)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GraphError("mark matrix has the wrong shape")
        for i in range(n):
            if rows[i][i] != Mark.NONE:
                raise GraphError(f"self-loop at {labels[i]}")
            for j in range(i + 1, n):
                if (rows[i][j] == Mark.NONE) != (rows[j][i] == Mark.NONE):
                    raise GraphError(f"half edge between {labels[i]} and {labels[j]}")
        g = cls.__new__(cls)
        g._init(labels, {v: i for i, v in enumerate(labels)}, rows)
        return g

    @classmethod
    def _trusted(cls, labels: tuple[str, ...], index: dict, rows, cache: dict | None = None) -> "MixedGraph":
        # no validation: callers pass sorted labels and a well-formed Mark matrix
        g = cls.__new__(cls)
        g._init(labels, index, tuple(tuple(r) for r in rows))
        if cache:
            g._cache.update(cache)
        return g

    @classmethod
    def parse(cls, text: str, nodes: Iterable[str] = ()) -> "MixedGraph":
        """Parse a compact edge list such as ``"A -> B; B <-> C; C o-> D"``.

        Each edge is ``left token right`` where the token is built from an
        optional left mark (``<`` arrow, ``o`` circle, otherwise tail), a
        dash, and an optional right mark (``>`` arrow, ``o`` circle).
        Extra isolated nodes can be listed in ``nodes``.
        """
        labels = set(nodes)
        edges = []
        for chunk in re.split(r"[;,\n]", text):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split()
            if len(parts) == 1:
                labels.add(parts[0])
                continue
            if len(parts) != 3:
                raise GraphError(f"cannot parse edge {chunk!r}")
            a, token, b = parts
            hit = _EDGE_TOKEN.match(token)
            if not hit:
                raise GraphError(f"unknown edge token {token!r}")
            left = {"<": Mark.ARROW, "o": Mark.CIRCLE}.get(hit.group(1), Mark.TAIL)
            right = {">": Mark.ARROW, "o": Mark.CIRCLE}.get(hit.group(2), Mark.TAIL)
            labels.update((a, b))
            edges.append((a, b, left, right))
        return cls(labels, edges)

    # ------------------------------------------------------------------ basics
    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def matrix(self) -> tuple[tuple[Mark, ...], ...]:
        return self._m

    def __len__(self) -> int:
        return len(self._nodes)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"unknown node {v!r}") from None

    def mark(self, a: str, b: str) -> Mark:
        """Mark at ``b`` on the edge between ``a`` and ``b``."""
        return self._m[self.index(a)][self.index(b)]

    def adjacent(self, a: str, b: str) -> bool:
        return self._m[self.index(a)][self.index(b)] != Mark.NONE

    def neighbors(self, v: str) -> list[str]:
        i = self.index(v)
        return [self._nodes[j] for j in _bits(self.adj_masks[i])]

    def is_directed(self, a: str, b: str) -> bool:
        """True iff ``a -> b``."""
        i, j = self.index(a), self.index(b)
        return self._m[i][j] == Mark.ARROW and self._m[j][i] == Mark.TAIL

    def is_bidirected(self, a: str, b: str) -> bool:
        i, j = self.index(a), self.index(b)
        return self._m[i][j] == Mark.ARROW and self._m[j][i] == Mark.ARROW

    def edges(self) -> list[tuple[str, str, Mark, Mark]]:
        """Edges as ``(a, b, mark_at_a, mark_at_b)`` with ``a < b``."""
        out = []
        n = len(self._nodes)
        for i in range(n):
            row = self._m[i]
            for j in range(i + 1, n):
                if row[j] != Mark.NONE:
                    out.append((self._nodes[i], self._nodes[j], self._m[j][i], row[j]))
        return out

    def num_edges(self) -> int:
        return sum(bin(a).count("1") for a in self.adj_masks) // 2

    def has_circles(self) -> bool:
        return any(Mark.CIRCLE in row for row in self._m)

    def key(self) -> str:
        """Canonical string of labels and marks; equal graphs share a key."""
        return ",".join(self._nodes) + "|" + "".join(str(int(x)) for row in self._m for x in row)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._m == other._m

    def __hash__(self) -> int:
        return hash((self._nodes, self._m))

    def __repr__(self) -> str:
        return f"MixedGraph({self.to_text()!r})"

    def to_text(self) -> str:
        left = {Mark.TAIL: "", Mark.ARROW: "<", Mark.CIRCLE: "o"}
        right = {Mark.TAIL: "", Mark.ARROW: ">", Mark.CIRCLE: "o"}
        parts = [f"{a} {left[ma]}-{right[mb]} {b}" for a, b, ma, mb in self.edges()]
        isolated = [v for i, v in enumerate(self._nodes) if not self.adj_masks[i]]
        return "; ".join(parts + isolated)

    def mask(self, labels: Iterable[str]) -> int:
        out = 0
        for v in labels:
            out |= 1 << self.index(v)
        return out

    def labels(self, mask: int) -> set[str]:
        return {self._nodes[i] for i in _bits(mask)}

    # ----------------------------------------------------------- cached masks
    def _cached(self, name, build):
        try:
            return self._cache[name]
        except KeyError:
            value = self._cache[name] = build()
            return value

    @property
    def adj_masks(self) -> tuple[int, ...]:
        def build():
            return tuple(
                sum(1 << j for j, x in enumerate(row) if x != Mark.NONE) for row in self._m
            )

        return self._cached("adj", build)

    @property
    def arrow_masks(self) -> tuple[int, ...]:
        """``arrow_masks[i]`` has bit ``j`` iff the edge ``j - i`` has an arrowhead at ``i``."""

        def build():
            n = len(self._nodes)
            return tuple(
                sum(1 << j for j in range(n) if self._m[j][i] == Mark.ARROW) for i in range(n)
            )

        return self._cached("arrow", build)

    @property
    def parent_masks(self) -> tuple[int, ...]:
        def build():
            n = len(self._nodes)
            m = self._m
            return tuple(
                sum(
                    1 << j
                    for j in range(n)
                    if m[j][i] == Mark.ARROW and m[i][j] == Mark.TAIL
                )
                for i in range(n)
            )

        return self._cached("pa", build)

    @property
    def ancestor_masks(self) -> tuple[int, ...]:
        """``ancestor_masks[i]``: proper ancestors of node ``i`` (directed paths only)."""
        return self._cached("anc", lambda: _closure(self.parent_masks))

    # -------------------------------------------------------------- predicates
    def ancestors(self, x: str) -> set[str]:
        return self.labels(self.ancestor_masks[self.index(x)])

    def descendants(self, x: str) -> set[str]:
        i = self.index(x)
        return {v for j, v in enumerate(self._nodes) if self.ancestor_masks[j] >> i & 1}


def _closure(parents: Sequence[int]) -> tuple[int, ...]:
    n = len(parents)
    anc = list(parents)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = anc[i]
            for j in _bits(anc[i]):
                acc |= anc[j]
            if acc != anc[i]:
                anc[i] = acc
                changed = True
    return tuple(anc)


# ---------------------------------------------------------------- public API
def ancestors(g: MixedGraph, x: str) -> set[str]:
    """Nodes with a directed path to ``x``, excluding ``x``."""
    return g.ancestors(x)


def _require_no_circles(g: MixedGraph, what: str) -> None:
    if g.has_circles():
        raise GraphError(f"{what} is undefined on graphs with circle marks")


def m_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True iff ``x`` and ``y`` are m-separated given ``z``.

    Circle marks are rejected.  ``x``, ``y`` and ``z`` must be disjoint.
    """
    z = set(z)
    if x == y or x in z or y in z:
        raise GraphError("m_separated needs distinct x, y outside the conditioning set")
    _require_no_circles(g, "m-separation")
    return not _connected(g, g.index(x), g.index(y), g.mask(z))


def _connected(g: MixedGraph, x: int, y: int, zmask: int) -> bool:
    """Walk reachability: is there an m-connecting walk from x to y given zmask."""
    m = g.matrix
    adj = g.adj_masks
    anc = g.ancestor_masks
    an_z = zmask
    for k in _bits(zmask):
        an_z |= anc[k]
    # states: (node, arrived with arrowhead)
    seen_arrow = 0
    seen_plain = 0
    stack = []
    for w in _bits(adj[x]):
        if w == y:
            return True
        arrow = m[x][w] == Mark.ARROW
        stack.append((w, arrow))
        if arrow:
            seen_arrow |= 1 << w
        else:
            seen_plain |= 1 << w
    while stack:
        v, into = stack.pop()
        in_z = zmask >> v & 1
        row = m[v]
        for u in _bits(adj[v]):
            collider = into and m[u][v] == Mark.ARROW
            if collider:
                if not an_z >> v & 1:
                    continue
            elif in_z:
                continue
            if u == y:
                return True
            arrow = row[u] == Mark.ARROW
            bit = 1 << u
            if arrow:
                if seen_arrow & bit:
                    continue
                seen_arrow |= bit
            else:
                if seen_plain & bit:
                    continue
                seen_plain |= bit
            stack.append((u, arrow))
    return False


def has_inducing_path(g: MixedGraph, x: str, y: str, hidden: Iterable[str] = ()) -> bool:
    """True iff an inducing path between ``x`` and ``y`` relative to ``hidden`` exists.

    Every non-hidden interior node of the path must be a collider and every
    collider must be an ancestor of ``x`` or ``y``.  This is the direct
    path search; it is exponential in the worst case.
    """
    hidden = set(hidden)
    if x == y or x in hidden or y in hidden:
        raise GraphError("has_inducing_path needs distinct x, y outside the hidden set")
    _require_no_circles(g, "inducing paths")
    return _inducing_dfs(g, g.index(x), g.index(y), g.mask(hidden))


def _inducing_dfs(g: MixedGraph, x: int, y: int, lmask: int) -> bool:
    m = g.matrix
    adj = g.adj_masks
    anc = g.ancestor_masks
    an_xy = anc[x] | anc[y] | (1 << x) | (1 << y)

    def ok(prev: int, cur: int, nxt: int) -> bool:
        collider = m[prev][cur] == Mark.ARROW and m[nxt][cur] == Mark.ARROW
        if collider:
            return bool(an_xy >> cur & 1)
        return bool(lmask >> cur & 1)

    def dfs(prev: int, cur: int, visited: int) -> bool:
        for nxt in _bits(adj[cur] & ~visited):
            if not ok(prev, cur, nxt):
                continue
            if nxt == y:
                return True
            if dfs(cur, nxt, visited | (1 << nxt)):
                return True
        return False

    if adj[x] >> y & 1:
        return True
    start = (1 << x)
    for w in _bits(adj[x] & ~(1 << y)):
        if dfs(x, w, start | (1 << w)):
            return True
    return False


def inducing_path_fast(g: MixedGraph, x: int, y: int, lmask: int) -> bool:
    """Inducing-path test for ancestral graphs by a single separation query.

    In an ancestral graph, an inducing path relative to ``lmask`` exists iff
    ``x`` and ``y`` are m-connected given ``An({x, y})`` minus the hidden set
    and the endpoints.  Indices and masks are used directly.
    """
    anc = g.ancestor_masks
    cond = (anc[x] | anc[y]) & ~lmask & ~((1 << x) | (1 << y))
    return _connected(g, x, y, cond)


def mutilate(g: MixedGraph, v: str, mode: MutilationMode) -> MixedGraph:
    """Remove the incoming or outgoing edges of ``v``.

    Incoming edges carry an arrowhead at ``v`` (bidirected edges included).
    Outgoing edges have a tail at ``v`` and an arrowhead at the other end.
    """
    i = g.index(v)
    m = [list(row) for row in g.matrix]
    for j in _bits(g.adj_masks[i]):
        at_v, at_other = m[j][i], m[i][j]
        if mode is MutilationMode.REMOVE_INCOMING:
            drop = at_v == Mark.ARROW
        else:
            drop = at_v == Mark.TAIL and at_other == Mark.ARROW
        if drop:
            m[i][j] = m[j][i] = Mark.NONE
    return MixedGraph.from_matrix(g.nodes, m)


def marginalize(g: MixedGraph, keep: Iterable[str]) -> MixedGraph:
    """Latent projection of an ancestral graph onto ``keep``.

    Kept nodes are adjacent iff an inducing path relative to the dropped
    nodes joins them; the edge is ``a -> b`` when ``a`` is an ancestor of
    ``b``, ``b -> a`` symmetrically, and ``a <-> b`` otherwise.
    """
    keep = sorted(set(keep))
    if not keep:
        raise GraphError("cannot marginalize onto an empty node set")
    _require_no_circles(g, "marginalization")
    idx = [g.index(v) for v in keep]
    lmask = ((1 << len(g)) - 1) & ~g.mask(keep)
    anc = g.ancestor_masks
    k = len(keep)
    m = [[Mark.NONE] * k for _ in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            i, j = idx[a], idx[b]
            if not inducing_path_fast(g, i, j, lmask):
                continue
            i_anc_j = anc[j] >> i & 1
            j_anc_i = anc[i] >> j & 1
            m[a][b] = Mark.TAIL if j_anc_i else Mark.ARROW
            m[b][a] = Mark.TAIL if i_anc_j else Mark.ARROW
    return MixedGraph.from_matrix(tuple(keep), m)


def is_ancestral(g: MixedGraph) -> bool:
    """No directed cycle, no almost directed cycle, no undirected edge."""
    _require_no_circles(g, "ancestrality")
    m = g.matrix
    anc = g.ancestor_masks
    n = len(g)
    for i in range(n):
        if anc[i] >> i & 1:
            return False
        for j in _bits(g.adj_masks[i]):
            if j < i:
                continue
            if m[i][j] == Mark.TAIL and m[j][i] == Mark.TAIL:
                return False
            if m[i][j] == Mark.ARROW and m[j][i] == Mark.ARROW:
                if anc[i] >> j & 1 or anc[j] >> i & 1:
                    return False
    return True


def is_maximal(g: MixedGraph) -> bool:
    """No pair of non-adjacent nodes is joined by an inducing path w.r.t. the empty set."""
    n = len(g)
    adj = g.adj_masks
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i] >> j & 1 and _collider_path(g, i, j):
                return False
    return True


def _collider_path(g: MixedGraph, x: int, y: int) -> bool:
    """Path from x to y whose interior nodes are all colliders in An({x, y})."""
    adj = g.adj_masks
    arrow_at = g.arrow_masks
    anc = g.ancestor_masks
    an_xy = (anc[x] | anc[y]) & ~((1 << x) | (1 << y))
    # frontier: interior nodes reached with an arrowhead
    frontier = adj[x] & arrow_at_from(g, x) & an_xy
    seen = frontier
    while frontier:
        nxt = 0
        for c in _bits(frontier):
            into_c = arrow_at[c]
            if into_c >> y & 1 and adj[c] >> y & 1:
                return True
            # next interior u: arrowheads at c from u and at u from c
            cand = adj[c] & into_c & an_xy & ~seen
            for u in _bits(cand):
                if g.matrix[c][u] == Mark.ARROW:
                    nxt |= 1 << u
        seen |= nxt
        frontier = nxt
    return False


def arrow_at_from(g: MixedGraph, x: int) -> int:
    """Mask of neighbours ``c`` of ``x`` such that the edge ``x - c`` has an arrowhead at ``c``."""
    row = g.matrix[x]
    return sum(1 << c for c in _bits(g.adj_masks[x]) if row[c] == Mark.ARROW)


def validate_mag(g: MixedGraph) -> bool:
    """True iff ``g`` is a maximal ancestral graph (circles are rejected)."""
    _require_no_circles(g, "MAG validation")
    return is_ancestral(g) and is_maximal(g)


def unshielded_triples(g: MixedGraph) -> Iterator[tuple[int, int, int]]:
    """Index triples ``(a, c, b)`` with ``a < b``, both adjacent to ``c``, ``a`` and ``b`` not adjacent."""
    adj = g.adj_masks
    for c in range(len(g)):
        nb = list(_bits(adj[c]))
        for p, a in enumerate(nb):
            for b in nb[p + 1:]:
                if not adj[a] >> b & 1:
                    yield a, c, b


def unshielded_colliders(g: MixedGraph) -> set[tuple[str, str, str]]:
    m = g.matrix
    names = g.nodes
    return {
        (names[a], names[c], names[b])
        for a, c, b in unshielded_triples(g)
        if m[a][c] == Mark.ARROW and m[b][c] == Mark.ARROW
    }


def discriminating_paths(g: MixedGraph) -> Iterator[tuple[int, ...]]:
    """Discriminating paths of a fully oriented graph as index tuples ``(theta, ..., beta, gamma)``.

    Every node strictly between ``theta`` and ``beta`` is a collider on the
    path and a parent of ``gamma``; ``theta`` and ``gamma`` are not adjacent.
    """
    m = g.matrix
    adj = g.adj_masks
    pa = g.parent_masks
    n = len(g)
    for gamma in range(n):
        for beta in _bits(adj[gamma]):
            for alpha in _bits(adj[beta] & pa[gamma]):
                if m[beta][alpha] != Mark.ARROW:
                    continue
                yield from _extend_discriminating(m, adj, pa, gamma, [alpha, beta])


def _extend_discriminating(m, adj, pa, gamma, tail):
    # tail = [q_k, ..., beta]; tail[0] is a collider candidate that is a parent of gamma
    head = tail[0]
    used = 0
    for v in tail:
        used |= 1 << v
    used |= 1 << gamma
    for w in _bits(adj[head] & ~used):
        if m[w][head] != Mark.ARROW:
            continue
        if not adj[w] >> gamma & 1:
            yield (w, *tail, gamma)
        elif pa[gamma] >> w & 1 and m[head][w] == Mark.ARROW:
            yield from _extend_discriminating(m, adj, pa, gamma, [w, *tail])


def markov_equivalent(g: MixedGraph, h: MixedGraph) -> bool:
    """Same skeleton, same unshielded colliders, same statuses on shared discriminating paths."""
    if g.nodes != h.nodes:
        raise GraphError("markov_equivalent needs identical node sets")
    _require_no_circles(g, "Markov equivalence")
    _require_no_circles(h, "Markov equivalence")
    if g.adj_masks != h.adj_masks:
        return False
    if unshielded_colliders(g) != unshielded_colliders(h):
        return False
    for first, second in ((g, h), (h, g)):
        paths_second = None
        for path in discriminating_paths(first):
            if paths_second is None:
                paths_second = set(discriminating_paths(second))
            if path not in paths_second:
                continue
            beta, gamma, alpha = path[-2], path[-1], path[-3]
            if _is_collider(first, alpha, beta, gamma) != _is_collider(second, alpha, beta, gamma):
                return False
    return True


def _is_collider(g: MixedGraph, a: int, c: int, b: int) -> bool:
    m = g.matrix
    return m[a][c] == Mark.ARROW and m[b][c] == Mark.ARROW


# ----------------------------------------------------------- serialization
def to_dict(g: MixedGraph) -> dict[str, Any]:
    return {
        "nodes": list(g.nodes),
        "edges": [
            {"a": a, "b": b, "mark_a": _MARK_NAMES[ma], "mark_b": _MARK_NAMES[mb]}
            for a, b, ma, mb in g.edges()
        ],
    }


def from_dict(data: Mapping[str, Any]) -> MixedGraph:
    try:
        nodes = data["nodes"]
        edges = [
            (e["a"], e["b"], _MARK_BY_NAME[e["mark_a"]], _MARK_BY_NAME[e["mark_b"]])
            for e in data.get("edges", [])
        ]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph object: {exc}") from exc
    return MixedGraph(nodes, edges)


def to_json(g: MixedGraph, indent: int | None = 2) -> str:
    return json.dumps(to_dict(g), indent=indent)


def from_json(text: str) -> MixedGraph:
    return from_dict(json.loads(text))


def load_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return from_dict(json.load(fh))


def save_graph(g: MixedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(g))
        fh.write("\n")


_DOT_HEAD = {Mark.TAIL: "none", Mark.ARROW: "normal", Mark.CIRCLE: "odot"}


def to_dot(g: MixedGraph, name: str = "G") -> str:
    """Graphviz rendering.  Directed ``a -> b``, bidirected ``[dir=both]``, circles as ``odot``."""
    lines = [f"digraph {json.dumps(name)} {{"]
    for v in g.nodes:
        lines.append(f"  {json.dumps(v)};")
    for a, b, ma, mb in g.edges():
        qa, qb = json.dumps(a), json.dumps(b)
        if ma == Mark.TAIL and mb == Mark.ARROW:
            lines.append(f"  {qa} -> {qb};")
        elif ma == Mark.ARROW and mb == Mark.TAIL:
            lines.append(f"  {qb} -> {qa};")
        elif ma == Mark.ARROW and mb == Mark.ARROW:
            lines.append(f"  {qa} -> {qb} [dir=both];")
        else:
            lines.append(
                f"  {qa} -> {qb} [dir=both, arrowtail={_DOT_HEAD[ma]}, arrowhead={_DOT_HEAD[mb]}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
