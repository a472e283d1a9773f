"""Per-reviewer spam priors: neighbor-tightness, feature-based, file, neutral."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .data import Dataset, ParseReport, Source, _decode, _open_lines
from .features import review_priors, reviewer_prior_from_reviews
from .graph import CoReviewParams, ReviewerGraph, collusiveness, jaccard_products

PRIOR_ALL = "all"
PRIOR_NT = "nt"
PRIOR_FILE = "file"
PRIOR_NEUTRAL = "neutral"


@dataclass
class PriorVector:
    """Spamicity prior per reviewer, each value in [0, 1]."""

    values: np.ndarray
    source: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if ((self.values < 0) | (self.values > 1)).any():
            raise ValueError("prior values must lie in [0, 1]")


@dataclass
class CandidateGroup:
    """A mined reviewer cluster; nt and posterior are filled downstream."""

    members: tuple[int, ...]
    nt: float | None = None
    posterior: float | None = None

    def __post_init__(self):
        self.members = tuple(sorted(self.members))
        if len(self.members) < 2:
            raise ValueError("a candidate group needs at least 2 members")


def neutral_prior(n_reviewers: int) -> PriorVector:
    return PriorVector(np.full(n_reviewers, 0.5), PRIOR_NEUTRAL)


def all_prior(
    dataset: Dataset,
    etf_window_days: int = 240,
    dev_threshold: float = 0.63,
) -> PriorVector:
    """Feature-based reviewer prior (per-review scores lifted by max)."""
    per_review = review_priors(dataset, etf_window_days, dev_threshold)
    return PriorVector(reviewer_prior_from_reviews(dataset, per_review), PRIOR_ALL)


def group_tightness(
    group: CandidateGroup,
    graph: ReviewerGraph,
    dataset: Dataset,
    params: CoReviewParams,
) -> float:
    """Mean weighted pair score over all member pairs, shrunk for small groups.

    Pair scores are collusiveness times product-set Jaccard. Pairs absent
    from the companion graph (they fell below its threshold) are recomputed
    exactly from the dataset rather than counted as zero: mined clusters
    need not be cliques.
    """
    members = group.members
    size = len(members)
    total = 0.0
    for a in range(size - 1):
        i = members[a]
        for b in range(a + 1, size):
            j = members[b]
            w = graph.edge_weight(i, j)
            if w is None:
                w = collusiveness(i, j, dataset, params) * jaccard_products(dataset, i, j)
            total += w
    n_pairs = size * (size - 1) // 2
    penalty = 1.0 / (1.0 + math.exp(-(size - 2)))
    return (total / n_pairs) * penalty


def nt_prior(
    groups: list[CandidateGroup],
    graph: ReviewerGraph,
    dataset: Dataset,
    params: CoReviewParams,
    fallback: float = 0.5,
) -> tuple[PriorVector, list[CandidateGroup]]:
    """Score groups by neighbor tightness and lift to member priors.

    Every member's prior is the tightness of its group (max over groups if
    a reviewer somehow appears in several); reviewers in no group get
    `fallback`, since inference needs a potential for every node.
    """
    if not (0 <= fallback <= 1):
        raise ValueError("fallback prior must lie in [0, 1]")
    values = np.full(dataset.n_reviewers, fallback, dtype=np.float64)
    touched = np.zeros(dataset.n_reviewers, dtype=bool)
    for g in groups:
        g.nt = group_tightness(g, graph, dataset, params)
        for i in g.members:
            if not touched[i] or g.nt > values[i]:
                values[i] = g.nt
                touched[i] = True
    return PriorVector(values, PRIOR_NT), groups


def load_prior_file(
    source: Source,
    dataset: Dataset,
    missing_value: float = 0.5,
) -> tuple[PriorVector, ParseReport]:
    """Read "reviewer_id TAB prior" lines into a full-length prior vector.

    Unknown reviewer ids and out-of-range priors are rejected per line;
    reviewers absent from the file keep `missing_value`.
    """
    report = ParseReport()
    values = np.full(dataset.n_reviewers, missing_value, dtype=np.float64)
    for line_no, raw in _open_lines(source):
        text = _decode(raw)
        if text is None:
            report.lines += 1
            report.add_reject(line_no, "invalid UTF-8")
            continue
        text = text.rstrip("\r")
        if not text.strip():
            report.blank += 1
            continue
        report.lines += 1
        cols = text.split("\t")
        if len(cols) != 2:
            report.add_reject(line_no, f"expected 2 columns, got {len(cols)}")
            continue
        rid, tok = cols
        idx = dataset.reviewer_index.get(rid)
        if idx is None:
            report.add_reject(line_no, f"unknown reviewer {rid!r}")
            continue
        try:
            prior = float(tok)
        except ValueError:
            report.add_reject(line_no, f"bad prior {tok!r}")
            continue
        if not 0.0 <= prior <= 1.0:
            report.add_reject(line_no, f"prior out of [0,1]: {tok!r}")
            continue
        values[idx] = prior
        report.retained += 1
    return PriorVector(values, PRIOR_FILE), report


def write_prior_file(prior: PriorVector, reviewer_ids: list[str], stream: TextIO) -> None:
    for rid, value in zip(reviewer_ids, prior.values):
        stream.write(f"{rid}\t{value:.12g}\n")


def write_groups_file(groups: list[CandidateGroup], reviewer_ids: list[str], stream: TextIO) -> None:
    """Dump groups as "group_id TAB nt TAB member,member,..." lines."""
    for gid, g in enumerate(groups):
        nt = "" if g.nt is None else f"{g.nt:.12g}"
        members = ",".join(reviewer_ids[i] for i in g.members)
        stream.write(f"{gid}\t{nt}\t{members}\n")
