"""Bivariate causal discovery: per-pair structure labels and their store."""

from __future__ import annotations

import enum
import json
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .graph import Mark, MixedGraph
from .independence import DataError, Dataset, median_bandwidth, rbf_gram, standardize

log = logging.getLogger(__name__)


class Structure(enum.Enum):
    """Relation of an ordered pair ``(a, b)``."""

    DIRECTED_AB = "directed_ab"
    DIRECTED_BA = "directed_ba"
    COMMON = "common"
    DIRECTED_COMMON_AB = "directed_common_ab"
    DIRECTED_COMMON_BA = "directed_common_ba"
    INDEPENDENT = "independent"
    UNMATCHED = "unmatched"
    UNDECIDED = "undecided"

    def swapped(self) -> "Structure":
        return _SWAP.get(self, self)

    @property
    def is_bivariate(self) -> bool:
        return self in _BIVARIATE


_SWAP = {
    Structure.DIRECTED_AB: Structure.DIRECTED_BA,
    Structure.DIRECTED_BA: Structure.DIRECTED_AB,
    Structure.DIRECTED_COMMON_AB: Structure.DIRECTED_COMMON_BA,
    Structure.DIRECTED_COMMON_BA: Structure.DIRECTED_COMMON_AB,
}
_BIVARIATE = frozenset(
    {
        Structure.DIRECTED_AB,
        Structure.DIRECTED_BA,
        Structure.COMMON,
        Structure.DIRECTED_COMMON_AB,
        Structure.DIRECTED_COMMON_BA,
    }
)


class ContradictionError(ValueError):
    """Two sources classify the same pair differently."""


@dataclass
class CausalStore:
    """Pairs sorted into directed, common-cause and directed-plus-common stores.

    ``directed`` and ``directed_common`` hold ordered pairs (cause first);
    ``common`` holds unordered pairs.  ``contexts`` maps a pair to the
    variables measured alongside it; confounding through them is not
    counted against a directed entry.
    """

    directed: set[tuple[str, str]] = field(default_factory=set)
    common: set[frozenset[str]] = field(default_factory=set)
    directed_common: set[tuple[str, str]] = field(default_factory=set)
    contexts: dict[frozenset[str], frozenset[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.directed) + len(self.common) + len(self.directed_common)

    def lookup(self, a: str, b: str) -> Structure | None:
        """Stored structure of the ordered pair ``(a, b)``, if any."""
        if (a, b) in self.directed:
            return Structure.DIRECTED_AB
        if (b, a) in self.directed:
            return Structure.DIRECTED_BA
        if frozenset((a, b)) in self.common:
            return Structure.COMMON
        if (a, b) in self.directed_common:
            return Structure.DIRECTED_COMMON_AB
        if (b, a) in self.directed_common:
            return Structure.DIRECTED_COMMON_BA
        return None

    def add(self, a: str, b: str, s: Structure, context: Iterable[str] = ()) -> None:
        """Store ``s`` for ``(a, b)``; non-bivariate labels are ignored."""
        if not s.is_bivariate:
            return
        old = self.lookup(a, b)
        if old is not None:
            if old != s:
                raise ContradictionError(
                    f"pair ({a}, {b}) classified as both {old.value} and {s.value}"
                )
            return
        context = frozenset(context) - {a, b}
        if context:
            self.contexts[frozenset((a, b))] = context
        if s is Structure.DIRECTED_AB:
            self.directed.add((a, b))
        elif s is Structure.DIRECTED_BA:
            self.directed.add((b, a))
        elif s is Structure.COMMON:
            self.common.add(frozenset((a, b)))
        elif s is Structure.DIRECTED_COMMON_AB:
            self.directed_common.add((a, b))
        else:
            self.directed_common.add((b, a))

    def context(self, a: str, b: str) -> frozenset[str]:
        return self.contexts.get(frozenset((a, b)), frozenset())

    def merge(self, other: "CausalStore") -> None:
        for a, b, s in other.entries():
            self.add(a, b, s, other.context(a, b))

    def entries(self) -> list[tuple[str, str, Structure]]:
        """All stored pairs as ``(a, b, structure)`` with ``a < b``, sorted."""
        out = []
        for a, b in self.directed:
            out.append((a, b, Structure.DIRECTED_AB) if a < b else (b, a, Structure.DIRECTED_BA))
        for pair in self.common:
            a, b = sorted(pair)
            out.append((a, b, Structure.COMMON))
        for a, b in self.directed_common:
            if a < b:
                out.append((a, b, Structure.DIRECTED_COMMON_AB))
            else:
                out.append((b, a, Structure.DIRECTED_COMMON_BA))
        return sorted(out, key=lambda t: (t[0], t[1]))

    def fixed_marks(self, g: MixedGraph) -> dict[tuple[str, str], Mark]:
        """Endpoint marks implied for the edges of ``g``: ``(a, b) -> mark at b``."""
        marks: dict[tuple[str, str], Mark] = {}
        for a, b, s in self.entries():
            if a not in g.nodes or b not in g.nodes or not g.adjacent(a, b):
                continue
            if s in (Structure.DIRECTED_AB, Structure.DIRECTED_COMMON_AB):
                marks[(a, b)], marks[(b, a)] = Mark.ARROW, Mark.TAIL
            elif s in (Structure.DIRECTED_BA, Structure.DIRECTED_COMMON_BA):
                marks[(a, b)], marks[(b, a)] = Mark.TAIL, Mark.ARROW
            else:
                marks[(a, b)] = marks[(b, a)] = Mark.ARROW
        return marks

    def to_list(self) -> list[dict]:
        out = []
        for a, b, s in self.entries():
            item = {"pair": [a, b], "structure": s.value}
            if self.context(a, b):
                item["context"] = sorted(self.context(a, b))
            out.append(item)
        return out


_ALIASES = {
    "directed": Structure.DIRECTED_AB,
    "common_cause": Structure.COMMON,
    "directed_common": Structure.DIRECTED_COMMON_AB,
}


def parse_structure(name: str) -> Structure:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return Structure(key)
    except ValueError:
        raise ValueError(f"unknown structure {name!r}") from None


def load_expert_knowledge(path) -> CausalStore:
    """Read a JSON list of ``{"pair": [a, b], "structure": name}`` assertions."""
    with open(path, encoding="utf-8") as fh:
        items = json.load(fh)
    store = CausalStore()
    if not isinstance(items, list):
        raise ValueError("expert knowledge must be a JSON list")
    for item in items:
        a, b = item["pair"]
        store.add(a, b, parse_structure(item["structure"]))
    return store


# ---------------------------------------------------------------- oracle
def _reach_avoiding(g: MixedGraph, target: int, avoid: int) -> int:
    """Nodes with a directed path to ``target`` whose nodes avoid ``avoid``."""
    pa = g.parent_masks
    seen = 0
    frontier = pa[target] & ~avoid
    while frontier:
        seen |= frontier
        nxt = 0
        for v in range(len(g)):
            if frontier >> v & 1:
                nxt |= pa[v]
        frontier = nxt & ~seen & ~avoid
    return seen


def oracle_bcd(
    truth: MixedGraph, observed: Iterable[str], a: str, b: str, context: Iterable[str] = ()
) -> Structure:
    """Pair structure read from a DAG that may contain unobserved nodes.

    ``a`` causes ``b`` when ``a`` is an ancestor of ``b``.  The pair is
    confounded when some third node has directed paths to ``a`` avoiding
    ``b`` and to ``b`` avoiding ``a``.  For a directed pair, the node and
    its paths must also avoid ``context``, the variables measured with the pair.
    """
    observed = set(observed)
    if a not in observed or b not in observed:
        raise ValueError(f"({a}, {b}) must both be observed")
    i, j = truth.index(a), truth.index(b)
    anc = truth.ancestor_masks
    a_causes_b = bool(anc[j] >> i & 1)
    b_causes_a = bool(anc[i] >> j & 1)
    if a_causes_b or b_causes_a:
        skip = truth.mask(set(context) & set(truth.nodes) - {a, b})
    else:
        skip = 0
    above_a = _reach_avoiding(truth, i, 1 << j | skip)
    above_b = _reach_avoiding(truth, j, 1 << i | skip)
    confounded = bool(above_a & above_b)
    if a_causes_b:
        return Structure.DIRECTED_COMMON_AB if confounded else Structure.DIRECTED_AB
    if b_causes_a:
        return Structure.DIRECTED_COMMON_BA if confounded else Structure.DIRECTED_BA
    return Structure.COMMON if confounded else Structure.INDEPENDENT


# ------------------------------------------------------------------ KCDC
#: relative margin between the two deviances below which no direction is chosen
KCDC_MARGIN = 0.1
#: cause-side bandwidth as a fraction of the median heuristic
KCDC_WIDTH = 0.5


def _ranks(v) -> np.ndarray:
    return standardize(rankdata(np.asarray(v, dtype=float).ravel()))


def conditional_deviance(cause, effect, width: float = KCDC_WIDTH) -> float:
    """Variance over samples of the RKHS norms of the embeddings of ``effect | cause``.

    Both variables are rank transformed; the embeddings use Nadaraya-Watson
    weights over the cause.
    """
    xs, ys = _ranks(cause), _ranks(effect)
    kx = rbf_gram(xs, median_bandwidth(xs) * width)
    ky = rbf_gram(ys)
    weights = kx / kx.sum(axis=0, keepdims=True)
    norms_sq = np.einsum("ij,ij->j", weights, ky @ weights)
    return float(np.var(np.sqrt(np.maximum(norms_sq, 0.0))))


def kcdc_direction(xs, ys, margin: float = KCDC_MARGIN, width: float = KCDC_WIDTH) -> Structure:
    """``DIRECTED_AB`` when ``xs -> ys`` has the clearly smaller deviance, ``DIRECTED_BA`` for the reverse."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape[0] != ys.shape[0]:
        raise DataError("xs and ys differ in length")
    if xs.shape[0] < 100:
        raise DataError("direction finding needs at least 100 samples")
    d_xy = conditional_deviance(xs, ys, width)
    d_yx = conditional_deviance(ys, xs, width)
    top = max(d_xy, d_yx)
    if top <= 0 or abs(d_xy - d_yx) / top <= margin:
        return Structure.UNDECIDED
    return Structure.DIRECTED_AB if d_xy < d_yx else Structure.DIRECTED_BA


# --------------------------------------------------------- classification
def adjacent_pairs(graphs: Iterable[MixedGraph]) -> list[tuple[str, str]]:
    pairs = set()
    for g in graphs:
        for a, b, _, _ in g.edges():
            pairs.add((a, b))
    return sorted(pairs)


def pair_contexts(graphs: Sequence[MixedGraph], pairs: Iterable[tuple[str, str]]):
    """Variables measured with each pair in every graph containing both."""
    out = {}
    for a, b in pairs:
        shared = [set(g.nodes) for g in graphs if a in g.nodes and b in g.nodes]
        out[(a, b)] = frozenset(set.intersection(*shared) - {a, b}) if shared else frozenset()
    return out


def pooled_columns(datasets: Sequence[Dataset], a: str, b: str, limit: int | None = None):
    """Stack the ``(a, b)`` samples of every dataset measuring both."""
    xs, ys = [], []
    for ds in datasets:
        if a in ds.variables and b in ds.variables:
            xs.append(ds.column(a))
            ys.append(ds.column(b))
    x, y = np.concatenate(xs), np.concatenate(ys)
    if limit is not None:
        x, y = x[:limit], y[:limit]
    return x, y


def classify_pairs(
    local_graphs: Sequence[MixedGraph],
    method: str,
    *,
    datasets: Sequence[Dataset] = (),
    truth: MixedGraph | None = None,
    observed: Iterable[str] | None = None,
    margin: float = KCDC_MARGIN,
    max_samples: int | None = None,
) -> CausalStore:
    """Classify every pair adjacent in some local graph and fill a store.

    ``method`` is ``"oracle"`` (needs ``truth``) or ``"kcdc"`` (needs the
    datasets; only directed pairs are produced).  Each pair is classified
    once from the pooled samples of all datasets that measure it.
    """
    store = CausalStore()
    pairs = adjacent_pairs(local_graphs)
    if method == "none":
        return store
    contexts = pair_contexts(local_graphs, pairs)
    if method == "oracle":
        if truth is None:
            raise ValueError("oracle classification needs a truth graph")
        obs = set(truth.nodes) if observed is None else set(observed)
        for a, b in pairs:
            store.add(a, b, oracle_bcd(truth, obs, a, b, contexts[(a, b)]), contexts[(a, b)])
    elif method == "kcdc":
        for a, b in pairs:
            xs, ys = pooled_columns(datasets, a, b, max_samples)
            s = kcdc_direction(xs, ys, margin)
            log.info("direction %s-%s: %s", a, b, s.value)
            store.add(a, b, s, contexts[(a, b)])
    else:
        raise ValueError(f"unknown classification method {method!r}")
    return store


def iter_pairs(store: CausalStore) -> Iterator[tuple[str, str, Structure]]:
    yield from store.entries()
