"""Co-review similarity and reviewer-graph construction.

Two reviews of one product are scored by how close in time and rating they
are; two reviewers are scored by their most suspicious shared product. Edges
above a threshold form the reviewer graph; multiplying each pair score by the
Jaccard similarity of the reviewers' product sets and thresholding again
yields the sparser companion graph used for candidate-group mining.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, TextIO

import numpy as np

from .data import Dataset

log = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)

PRIMARY = "primary"
COMPANION = "companion"


def standard_normal_cdf(x: float) -> float:
    # erfc-based: relative error is that of libm erfc (well under 1e-12)
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass(frozen=True)
class CoReviewParams:
    """Spread scales for the time gap (days) and rating gap (stars)."""

    sigma1: float = 90.0
    sigma2: float = 3.0

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("sigma1 and sigma2 must be positive")


def co_review_similarity(delta_t: float, delta_psi: float, params: CoReviewParams) -> float:
    """Similarity of two reviews of one product, in (0, 1].

    Equals 1 exactly when both gaps are zero and decreases monotonically
    as either |delta_t| or |delta_psi| grows.
    """
    return (
        4.0
        * standard_normal_cdf(-abs(delta_t) / params.sigma1)
        * standard_normal_cdf(-abs(delta_psi) / params.sigma2)
    )


def collusiveness(r_i: int, r_j: int, dataset: Dataset, params: CoReviewParams) -> float:
    """Max co-review similarity of two reviewers over their shared products.

    Returns 0.0 when the reviewers share no product.
    """
    if r_i == r_j:
        raise ValueError("collusiveness requires two distinct reviewers")
    a, b = dataset.per_reviewer[r_i], dataset.per_reviewer[r_j]
    if len(b) < len(a):
        a, b = b, a
    day, rating = dataset.day_of, dataset.rating_of
    best = 0.0
    for product, ia in a.items():
        ib = b.get(product)
        if ib is None:
            continue
        s = co_review_similarity(int(day[ia]) - int(day[ib]), int(rating[ia]) - int(rating[ib]), params)
        if s > best:
            best = s
    return best


def jaccard_products(dataset: Dataset, r_i: int, r_j: int) -> float:
    """Jaccard similarity of two reviewers' product sets."""
    a, b = dataset.products_of(r_i), dataset.products_of(r_j)
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / (len(a) + len(b) - inter)


@dataclass
class ReviewerGraph:
    """Undirected weighted reviewer graph in CSR form.

    Adjacency is symmetric, self-loop free, sorted by neighbor within each
    row, with every weight in (0, 1] and >= `threshold`.
    """

    kind: str
    threshold: float
    node_count: int
    indptr: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, node_count: int, edges, kind: str, threshold: float) -> "ReviewerGraph":
        """Build from an iterable of (i, j, weight) unordered pairs."""
        edges = list(edges)
        m = len(edges)
        src = np.empty(2 * m, dtype=np.int64)
        dst = np.empty(2 * m, dtype=np.int64)
        w = np.empty(2 * m, dtype=np.float64)
        for k, (i, j, weight) in enumerate(edges):
            if i == j:
                raise ValueError("self-loop in edge list")
            src[k], dst[k], w[k] = i, j, weight
            src[m + k], dst[m + k], w[m + k] = j, i, weight
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(kind=kind, threshold=threshold, node_count=node_count,
                   indptr=indptr, neighbors=dst, weights=w)

    @property
    def edge_count(self) -> int:
        return len(self.neighbors) // 2

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(self.indptr[i], self.indptr[i + 1])
        return self.neighbors[sl], self.weights[sl]

    def edge_weight(self, i: int, j: int) -> float | None:
        nbrs, w = self.row(i)
        pos = np.searchsorted(nbrs, j)
        if pos < len(nbrs) and nbrs[pos] == j:
            return float(w[pos])
        return None

    def iter_edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield each undirected edge once as (i, j, w) with i < j."""
        for i in range(self.node_count):
            nbrs, w = self.row(i)
            for t in range(len(nbrs)):
                j = int(nbrs[t])
                if j > i:
                    yield i, j, float(w[t])

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        assert self.indptr[0] == 0 and self.indptr[-1] == len(self.neighbors)
        for i in range(self.node_count):
            nbrs, w = self.row(i)
            assert (np.diff(nbrs) > 0).all(), f"row {i} not strictly sorted"
            assert (nbrs != i).all(), f"self-loop at {i}"
            assert ((w > 0) & (w <= 1)).all(), f"row {i} weight out of (0,1]"
            assert (w >= self.threshold).all(), f"row {i} weight below threshold"
            for t in range(len(nbrs)):
                back = self.edge_weight(int(nbrs[t]), i)
                assert back == w[t], f"asymmetric edge ({i},{nbrs[t]})"


def build_graphs(
    dataset: Dataset,
    params: CoReviewParams,
    delta: float,
    delta_prime: float,
    per_product_cap: int | None = None,
) -> tuple[ReviewerGraph, ReviewerGraph]:
    """Build the reviewer graph and its companion in one pass.

    Pairs are enumerated per product (never all N^2 pairs) and the max pair
    score is aggregated across products. An edge (i, j, collu) enters the
    primary graph iff collu >= delta; (i, j, collu * jaccard) enters the
    companion iff that product >= delta_prime. When `per_product_cap` is set,
    oversized products keep only their cap earliest reviews, ordered by
    (date, reviewer_id), and a warning is logged.
    """
    if not (0 < delta <= 1) or not (0 < delta_prime <= 1):
        raise ValueError("delta and delta_prime must lie in (0, 1]")

    day_of, rating_of, reviewer_of = dataset.day_of, dataset.rating_of, dataset.reviewer_of
    sim = co_review_similarity
    pair_max: dict[tuple[int, int], float] = {}

    for p, idxs in enumerate(dataset.per_product):
        m = len(idxs)
        if per_product_cap is not None and m > per_product_cap:
            keep = np.lexsort((reviewer_of[idxs], day_of[idxs]))[:per_product_cap]
            idxs = idxs[np.sort(keep)]  # restore reviewer-ascending order
            m = per_product_cap
            log.warning(
                "product %s has %d reviews; capped to earliest %d",
                dataset.product_ids[p], len(dataset.per_product[p]), m,
            )
        if m < 2:
            continue
        revs = reviewer_of[idxs]
        days = day_of[idxs]
        rats = rating_of[idxs]
        for a in range(m - 1):
            ra, da, sa = int(revs[a]), int(days[a]), int(rats[a])
            for b in range(a + 1, m):
                s = sim(da - int(days[b]), sa - int(rats[b]), params)
                key = (ra, int(revs[b]))
                if s > pair_max.get(key, 0.0):
                    pair_max[key] = s

    min_keep = min(delta, delta_prime)
    primary_edges: list[tuple[int, int, float]] = []
    companion_edges: list[tuple[int, int, float]] = []
    for (i, j), c in pair_max.items():
        if c < min_keep:
            continue
        if c >= delta:
            primary_edges.append((i, j, c))
        if c >= delta_prime:
            cw = c * jaccard_products(dataset, i, j)
            if cw >= delta_prime:
                companion_edges.append((i, j, cw))

    n = dataset.n_reviewers
    return (
        ReviewerGraph.from_edges(n, primary_edges, PRIMARY, delta),
        ReviewerGraph.from_edges(n, companion_edges, COMPANION, delta_prime),
    )


def write_graph_tsv(graph: ReviewerGraph, reviewer_ids: list[str], stream: TextIO) -> None:
    """Dump edges as "id_a TAB id_b TAB weight", lexicographically sorted.

    Dense-id order equals sorted string-id order, so emitting pairs in
    ascending dense order yields lexicographically sorted lines.
    """
    for i, j, w in graph.iter_edges():
        stream.write(f"{reviewer_ids[i]}\t{reviewer_ids[j]}\t{w:.12g}\n")
