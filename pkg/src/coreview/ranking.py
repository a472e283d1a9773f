"""Ranked reviewer/group lists and top-k evaluation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .data import SPAMMER
from .errors import MetricError
from .priors import CandidateGroup


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    reviewer_id: str
    score: float


def rank_reviewers(spam_scores: Sequence[float], reviewer_ids: Sequence[str]) -> list[RankedEntry]:
    """Rank all reviewers by spam belief, descending.

    Ties break by ascending reviewer id, so the output is invariant under
    any permutation of the inputs.
    """
    if len(spam_scores) != len(reviewer_ids):
        raise ValueError("one score per reviewer required")
    order = sorted(range(len(reviewer_ids)), key=lambda t: (-spam_scores[t], reviewer_ids[t]))
    return [
        RankedEntry(rank=pos + 1, reviewer_id=reviewer_ids[t], score=float(spam_scores[t]))
        for pos, t in enumerate(order)
    ]


def rank_groups(groups: list[CandidateGroup], spam_scores: Sequence[float]) -> list[CandidateGroup]:
    """Order groups by posterior = mean member spam belief, descending.

    Fills each group's `posterior`; ties break by the smallest member id.
    """
    for g in groups:
        g.posterior = float(sum(spam_scores[i] for i in g.members) / len(g.members))
    return sorted(groups, key=lambda g: (-g.posterior, g.members))


def ndcg_at_k(ranked_ids: Sequence[str], labels: Mapping[str, str], k: int) -> float:
    """NDCG@k with binary spammer relevance.

    Unlabeled reviewers are removed from the list before computing; the
    ideal ranking puts every labeled spammer first. Raises MetricError when
    no labeled spammer exists.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rel = [1 if labels[r] == SPAMMER else 0 for r in ranked_ids if r in labels]
    n_spammers = sum(rel)
    if n_spammers == 0:
        raise MetricError("NDCG undefined: no labeled spammer in the ranking")
    dcg = sum(rel[i] / math.log2(i + 2) for i in range(min(k, len(rel))))
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(k, n_spammers)))
    return dcg / idcg


def overlap_degree(a: Sequence[str], b: Sequence[str]) -> float:
    """Fraction of shared members between two equal-length top-k lists."""
    k = _common_k(a, b)
    return len(set(a) & set(b)) / k


def similarity_degree(a: Sequence[str], b: Sequence[str]) -> float:
    """Position-aware agreement of two equal-length top-k lists.

    Members of both lists contribute their absolute 1-based position
    difference; members of only one list contribute k. The total is scaled
    by k^2 and subtracted from 1, which makes the measure symmetric.
    """
    k = _common_k(a, b)
    pos_b = {rid: i + 1 for i, rid in enumerate(b)}
    total = 0
    for i, rid in enumerate(a):
        loc = pos_b.get(rid)
        total += abs(i + 1 - loc) if loc is not None else k
    return 1.0 - total / (k * k)


def _common_k(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) != len(b):
        raise ValueError(f"list lengths differ: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty ranking lists")
    return len(a)
