from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass

from ..graph import GraphError, MixedGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metrics:
    mag_count: int
    precision: float
    recall: float

    def as_dict(self) -> dict:
        return asdict(self)


def precision_recall(mags: Sequence[MixedGraph], truth: MixedGraph) -> Metrics:
    """Edge-level agreement of a MAG list with the truth.

    An edge counts when the truth has the same adjacency with the same
    marks at both ends.  Precision divides by all edges in the list;
    recall by the truth's edge count times the list length.
    """
    if not mags:
        log.warning("no solutions to score")
        return Metrics(0, 0.0, 0.0)
    truth_nodes = set(truth.nodes)
    total = hits = 0
    for g in mags:
        if set(g.nodes) != truth_nodes:
            raise GraphError("solution and truth have different node sets")
        for a, b, ma, mb in g.edges():
            total += 1
            hits += truth.mark(b, a) == ma and truth.mark(a, b) == mb
    truth_edges = truth.num_edges()
    precision = hits / total if total else 0.0
    recall = hits / (truth_edges * len(mags)) if truth_edges else 0.0
    return Metrics(len(mags), precision, recall)
