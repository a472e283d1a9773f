"""Review-based behavioral features and their combination into spam priors.

Six signals per retained review: chronological rank on the product, absolute
rating deviation from the product mean, rating extremity, thresholded
deviation, early-time-frame score, and whether the author is a one-review
account. Each is normalized through the empirical CDF over all retained
reviews (lower normalized value = more suspicious), then combined into a
single review score that is lifted to reviewers by taking their max review.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class ReviewFeatureRow:
    rank: int
    rd: float
    ext: int
    dev: int
    etf: float
    isr: int


@dataclass
class ReviewFeatures:
    """Columnar feature values aligned with Dataset.reviews."""

    rank: np.ndarray
    rd: np.ndarray
    ext: np.ndarray
    dev: np.ndarray
    etf: np.ndarray
    isr: np.ndarray

    def row(self, i: int) -> ReviewFeatureRow:
        return ReviewFeatureRow(
            rank=int(self.rank[i]),
            rd=float(self.rd[i]),
            ext=int(self.ext[i]),
            dev=int(self.dev[i]),
            etf=float(self.etf[i]),
            isr=int(self.isr[i]),
        )


def compute_review_features(
    dataset: Dataset,
    etf_window_days: int = 240,
    dev_threshold: float = 0.63,
) -> ReviewFeatures:
    """Compute the six behavioral features for every retained review.

    rank is the 1-based chronological position among the product's reviews
    (ties broken by reviewer id); etf decays linearly from 1 at the product's
    first review to 0 at `etf_window_days` after it.
    """
    n = len(dataset.reviews)
    day, rating, reviewer = dataset.day_of, dataset.rating_of, dataset.reviewer_of

    rank = np.zeros(n, dtype=np.int64)
    rd = np.zeros(n, dtype=np.float64)
    etf = np.zeros(n, dtype=np.float64)

    for idxs in dataset.per_product:
        days = day[idxs]
        # idxs are reviewer-ascending, so a stable sort on day breaks ties
        # by reviewer dense id (== reviewer_id byte order)
        order = np.argsort(days, kind="stable")
        chron = idxs[order]
        rank[chron] = np.arange(1, len(idxs) + 1)
        mean = rating[idxs].mean()
        rd[idxs] = np.abs(rating[idxs] - mean)
        first = days.min()
        etf[idxs] = np.maximum(0.0, 1.0 - (days - first) / etf_window_days)

    ext = (rating >= 4).astype(np.int64)
    dev = (rd / 4.0 > dev_threshold).astype(np.int64)
    counts = np.array([len(d) for d in dataset.per_reviewer], dtype=np.int64)
    isr = (counts[reviewer] == 1).astype(np.int64)

    return ReviewFeatures(rank=rank, rd=rd, ext=ext, dev=dev, etf=etf, isr=isr)


def ecdf_normalize(values, high_is_suspicious: bool) -> np.ndarray:
    """Normalize via the empirical CDF so lower output = more suspicious.

    P(X <= x) counts ties inclusively over the input itself; the output is
    1 - P when high raw values are suspicious, else P.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("ecdf_normalize requires a non-empty input")
    p = np.searchsorted(np.sort(v), v, side="right") / v.size
    return 1.0 - p if high_is_suspicious else p


def combine_prior(f_values) -> float:
    """Fold normalized feature values into one spam score in [0, 1]."""
    f = np.asarray(f_values, dtype=np.float64)
    if f.size == 0:
        raise ValueError("combine_prior requires at least one feature value")
    return float(1.0 - np.sqrt(np.mean(f * f)))


# (column, high_is_suspicious); rank is the one low-is-suspicious signal:
# campaign reviews land early on a product
_DIRECTIONS = (
    ("rank", False),
    ("rd", True),
    ("ext", True),
    ("dev", True),
    ("etf", True),
    ("isr", True),
)


def review_priors(
    dataset: Dataset,
    etf_window_days: int = 240,
    dev_threshold: float = 0.63,
) -> np.ndarray:
    """Per-review spam prior: features -> global ECDF -> combination."""
    feats = compute_review_features(dataset, etf_window_days, dev_threshold)
    n = len(dataset.reviews)
    f = np.empty((n, len(_DIRECTIONS)), dtype=np.float64)
    for col, (name, high) in enumerate(_DIRECTIONS):
        f[:, col] = ecdf_normalize(getattr(feats, name), high)
    return 1.0 - np.sqrt(np.mean(f * f, axis=1))


def reviewer_prior_from_reviews(dataset: Dataset, priors: np.ndarray) -> np.ndarray:
    """Lift per-review priors to reviewers by max over their reviews."""
    if len(priors) != len(dataset.reviews):
        raise ValueError("one prior per retained review required")
    out = np.zeros(dataset.n_reviewers, dtype=np.float64)
    np.maximum.at(out, dataset.reviewer_of, priors)
    return out
