"""Synthetic data, random ground truths and overlapping-dataset problems."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..graph import Mark, MixedGraph, marginalize
from ..independence import DataError, Dataset

SYNTHETIC1_SCALES = (1.0, 0.5, 0.5)
SYNTHETIC2_SCALES = (1.0, 0.5, 0.5, 0.5, 1.0, 0.25)
SYNTHETIC1_SPLIT = (("X", "Y"), ("Y", "Z"))
SYNTHETIC2_SPLIT = (("X", "Y", "Z"), ("S", "V", "W", "Z"))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _check_n(n: int) -> None:
    if n < 2:
        raise DataError("sample size must be at least 2")


def gen_synthetic1(n: int, seed=None, scales: Sequence[float] = SYNTHETIC1_SCALES) -> Dataset:
    """Chain X -> Y -> Z with multiplicative exponential noise."""
    _check_n(n)
    rng = _rng(seed)
    sx, sy, sz = scales
    x = rng.exponential(sx, n)
    y = 3.0 * np.log(x**2) * rng.exponential(sy, n)
    z = 4.0 * y**2 * rng.exponential(sz, n)
    return Dataset(("X", "Y", "Z"), np.column_stack([x, y, z]), "synthetic1")


def gen_synthetic2(n: int, seed=None, scales: Sequence[float] = SYNTHETIC2_SCALES) -> Dataset:
    """Y -> X, Y -> Z -> W -> V <- S with multiplicative exponential noise."""
    _check_n(n)
    rng = _rng(seed)
    s_y, s_x, s_z, s_w, s_s, s_v = scales
    y = rng.exponential(s_y, n)
    x = 3.0 * np.log(y**2) * rng.exponential(s_x, n)
    z = 4.0 * y**2 * rng.exponential(s_z, n)
    w = np.sqrt(z) * rng.exponential(s_w, n)
    s = rng.exponential(s_s, n)
    v = w**2 * s**3 * rng.exponential(s_v, n)
    cols = {"S": s, "V": v, "W": w, "X": x, "Y": y, "Z": z}
    names = tuple(sorted(cols))
    return Dataset(names, np.column_stack([cols[k] for k in names]), "synthetic2")


SYNTHETIC1_TRUTH = MixedGraph.parse("X -> Y; Y -> Z")
SYNTHETIC2_TRUTH = MixedGraph.parse("Y -> X; Y -> Z; Z -> W; W -> V; S -> V")


# ------------------------------------------------------------ random graphs
def node_names(n: int, prefix: str = "X") -> list[str]:
    width = len(str(n))
    return [f"{prefix}{i:0{width}d}" for i in range(1, n + 1)]


def _creates_cycle(children: list[set[int]], src: int, dst: int) -> bool:
    # adding src -> dst closes a cycle iff src is reachable from dst
    stack, seen = [dst], {dst}
    while stack:
        v = stack.pop()
        if v == src:
            return True
        for w in children[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def melancon_dag(n: int, seed=None, steps: int | None = None, prefix: str = "X") -> MixedGraph:
    """DAG from the edge-toggle Markov chain started at the empty graph.

    Each step draws an ordered pair; an existing arc is deleted, a missing
    one is added when the graph stays acyclic.  ``steps`` defaults to
    ``10 n^2``.
    """
    if n < 1:
        raise ValueError("a graph needs at least one node")
    rng = _rng(seed)
    steps = 10 * n * n if steps is None else steps
    children: list[set[int]] = [set() for _ in range(n)]
    if n > 1:
        draws = rng.integers(0, n, size=(steps, 2))
        for i, j in draws:
            i, j = int(i), int(j)
            if i == j:
                continue
            if j in children[i]:
                children[i].discard(j)
            elif not _creates_cycle(children, i, j):
                children[i].add(j)
    names = node_names(n, prefix)
    edges = [(names[i], names[j], Mark.TAIL, Mark.ARROW) for i in range(n) for j in sorted(children[i])]
    return MixedGraph(names, edges)


@dataclass
class RandomTruth:
    dag: MixedGraph
    observed: tuple[str, ...]

    @property
    def mag(self) -> MixedGraph:
        return marginalize(self.dag, self.observed)


def random_truth(n_nodes: int, seed=None, p_conf: float = 0.0) -> RandomTruth:
    """Random DAG over observed nodes, plus one latent parent per pair with probability ``p_conf``."""
    if n_nodes < 3:
        raise ValueError("random truths need at least three nodes")
    rng = _rng(seed)
    dag = melancon_dag(n_nodes, rng)
    observed = dag.nodes
    if p_conf > 0:
        edges = [(a, b, ma, mb) for a, b, ma, mb in dag.edges()]
        latents = []
        for i, a in enumerate(observed):
            for b in observed[i + 1:]:
                if rng.random() < p_conf:
                    name = f"L{len(latents) + 1}"
                    latents.append(name)
                    edges += [(name, a, Mark.TAIL, Mark.ARROW), (name, b, Mark.TAIL, Mark.ARROW)]
        dag = MixedGraph(list(observed) + latents, edges)
    return RandomTruth(dag, tuple(observed))


def overlap_split(variables: Sequence[str], k: int, seed=None) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Two variable sets sharing ``k`` randomly chosen variables; the first has ``(n + k) // 2``."""
    n = len(variables)
    if not 1 <= k <= n:
        raise ValueError(f"overlap must lie in [1, {n}]")
    rng = _rng(seed)
    perm = [variables[i] for i in rng.permutation(n)]
    shared, rest = perm[:k], perm[k:]
    first = (n + k) // 2 - k
    v1 = tuple(sorted(shared + rest[:first]))
    v2 = tuple(sorted(shared + rest[first:]))
    return v1, v2


# ------------------------------------------------------- structural models
_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": lambda v: np.tanh(2.0 * v),
    "sin": lambda v: np.sin(2.0 * v),
    "square": lambda v: v**2,
    "abs": np.abs,
    "softplus": lambda v: np.log1p(np.exp(2.0 * v)),
}


@dataclass
class Sem:
    """Additive-noise structural equations over a DAG.

    Each child is the sum of one nonlinearity per parent (applied to the
    standardized parent) plus centred exponential noise.
    """

    dag: MixedGraph
    functions: dict[tuple[str, str], str] = field(default_factory=dict)
    noise: dict[str, float] = field(default_factory=dict)

    def sample(self, n: int, seed=None) -> Dataset:
        _check_n(n)
        rng = _rng(seed)
        order = topological_order(self.dag)
        cols: dict[str, np.ndarray] = {}
        for v in order:
            val = self.noise.get(v, 1.0) * (rng.exponential(1.0, n) - 1.0)
            for p in parents(self.dag, v):
                src = cols[p]
                z = (src - src.mean()) / (src.std() or 1.0)
                val = val + _FUNCTIONS[self.functions[(p, v)]](z)
            cols[v] = val
        names = self.dag.nodes
        return Dataset(names, np.column_stack([cols[v] for v in names]))


def parents(dag: MixedGraph, v: str) -> list[str]:
    return [p for p in dag.neighbors(v) if dag.is_directed(p, v)]


def topological_order(dag: MixedGraph) -> list[str]:
    pending = {v: set(parents(dag, v)) for v in dag.nodes}
    order: list[str] = []
    while pending:
        ready = sorted(v for v, ps in pending.items() if not ps)
        if not ready:
            raise ValueError("graph has a directed cycle")
        for v in ready:
            order.append(v)
            del pending[v]
        for ps in pending.values():
            ps.difference_update(ready)
    return order


def random_sem(dag: MixedGraph, seed=None, noise: float = 0.5) -> Sem:
    rng = _rng(seed)
    names = sorted(_FUNCTIONS)
    functions = {}
    for a, b, ma, mb in dag.edges():
        cause, effect = (a, b) if mb == Mark.ARROW else (b, a)
        functions[(cause, effect)] = names[int(rng.integers(len(names)))]
    return Sem(dag, functions, {v: noise for v in dag.nodes})
