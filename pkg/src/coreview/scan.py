"""SCAN structural clustering over the companion reviewer graph.

Classical SCAN: structural similarity of two adjacent nodes is the size of
the intersection of their closed neighborhoods over the geometric mean of the
neighborhood sizes; nodes with at least `mu` epsilon-similar neighbors
(including themselves) are cores; clusters grow from cores by structure
reachability. Hubs and outliers stay unclustered. Edge weights are ignored;
only topology matters here.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import ReviewerGraph
from .priors import CandidateGroup

_UNCLASSIFIED = -1
_NONMEMBER = -2


def structural_similarity(graph: ReviewerGraph, u: int, v: int) -> float:
    """|closed(u) & closed(v)| / sqrt(|closed(u)| * |closed(v)|)."""
    gu = _closed(graph, u)
    gv = _closed(graph, v)
    inter = np.intersect1d(gu, gv, assume_unique=True).size
    return inter / math.sqrt(len(gu) * len(gv))


def _closed(graph: ReviewerGraph, u: int) -> np.ndarray:
    nbrs, _ = graph.row(u)
    pos = np.searchsorted(nbrs, u)
    return np.insert(nbrs, pos, u)


def scan_cluster(graph: ReviewerGraph, epsilon: float = 0.6, mu: int = 2) -> list[CandidateGroup]:
    """Mine dense clusters; returns groups of >= 2 members (dense ids).

    Nodes are processed in ascending dense id, so a border node reachable
    from two clusters joins the first-processed one; the result is a
    disjoint partition of a subset of the nodes.
    """
    if not (0 < epsilon <= 1):
        raise ValueError("epsilon must lie in (0, 1]")
    if mu < 2:
        raise ValueError("mu must be >= 2")

    n = graph.node_count
    labels = np.full(n, _UNCLASSIFIED, dtype=np.int64)
    closed = [_closed(graph, v) for v in range(n)]
    eps_cache: dict[int, np.ndarray] = {}

    def eps_neighbors(v: int) -> np.ndarray:
        got = eps_cache.get(v)
        if got is None:
            gv = closed[v]
            size_v = len(gv)
            keep = []
            for u in gv:
                u = int(u)
                if u == v:
                    keep.append(u)
                    continue
                gu = closed[u]
                inter = np.intersect1d(gv, gu, assume_unique=True).size
                if inter / math.sqrt(size_v * len(gu)) >= epsilon:
                    keep.append(u)
            got = np.array(keep, dtype=np.int64)
            eps_cache[v] = got
        return got

    clusters: list[list[int]] = []
    for v in range(n):
        if labels[v] != _UNCLASSIFIED:
            continue
        seeds = eps_neighbors(v)
        if len(seeds) < mu:
            labels[v] = _NONMEMBER
            continue
        cid = len(clusters)
        clusters.append([])
        queue = list(seeds)
        for s in seeds:
            labels[s] = cid
        while queue:
            y = queue.pop(0)
            reach = eps_neighbors(y)
            if len(reach) < mu:
                continue  # border node: assigned but not expanded
            for x in reach:
                x = int(x)
                state = labels[x]
                if state == _UNCLASSIFIED:
                    labels[x] = cid
                    queue.append(x)
                elif state == _NONMEMBER:
                    labels[x] = cid

    for cid in range(len(clusters)):
        clusters[cid] = [int(i) for i in np.flatnonzero(labels == cid)]

    return [
        CandidateGroup(members=tuple(members))
        for members in clusters
        if len(members) >= 2
    ]
