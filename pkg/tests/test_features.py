import math

import numpy as np
import pytest

from coreview import combine_prior, compute_review_features, ecdf_normalize
from coreview.features import review_priors, reviewer_prior_from_reviews
from coreview.priors import all_prior

from conftest import make_dataset


def _single_row(ds, reviewer, product, feats):
    idx = ds.per_reviewer[ds.reviewer_index[reviewer]][ds.product_index[product]]
    return feats.row(idx)


def test_one_review_product_forces_defaults():
    ds = make_dataset([("u1", "p1", 5, 100), ("u1", "p2", 1, 0)])
    feats = compute_review_features(ds)
    row = _single_row(ds, "u1", "p1", feats)
    assert row.rank == 1
    assert row.rd == 0.0
    assert row.ext == 1
    assert row.etf == 1.0
    assert row.isr == 0  # author has two retained reviews


def test_max_deviation_trips_dev():
    ds = make_dataset([
        ("u1", "p1", 1, 10),
        ("u2", "p1", 5, 0), ("u3", "p1", 5, 0), ("u4", "p1", 5, 0), ("u5", "p1", 5, 0),
    ])
    feats = compute_review_features(ds, dev_threshold=0.63)
    row = _single_row(ds, "u1", "p1", feats)
    mean = (1 + 5 * 4) / 5
    assert abs(row.rd - abs(1 - mean)) < 1e-12
    # rd/4 = 0.8 > 0.63
    assert row.dev == 1
    assert _single_row(ds, "u2", "p1", feats).dev == 0


def test_etf_linear_decay():
    ds = make_dataset([("u1", "p1", 5, 0), ("u2", "p1", 5, 120), ("u3", "p1", 5, 1000)])
    feats = compute_review_features(ds, etf_window_days=240)
    assert _single_row(ds, "u1", "p1", feats).etf == 1.0
    assert abs(_single_row(ds, "u2", "p1", feats).etf - 0.5) < 1e-12
    assert _single_row(ds, "u3", "p1", feats).etf == 0.0


def test_rank_is_chronological_with_id_tiebreak():
    ds = make_dataset([
        ("u3", "p1", 5, 5), ("u1", "p1", 5, 5), ("u2", "p1", 5, 1),
    ])
    feats = compute_review_features(ds)
    assert _single_row(ds, "u2", "p1", feats).rank == 1
    assert _single_row(ds, "u1", "p1", feats).rank == 2  # ties by id: u1 < u3
    assert _single_row(ds, "u3", "p1", feats).rank == 3


def test_isr_flags_single_review_authors():
    ds = make_dataset([("u1", "p1", 5, 0), ("u2", "p1", 5, 0), ("u2", "p2", 5, 0)])
    feats = compute_review_features(ds)
    assert _single_row(ds, "u1", "p1", feats).isr == 1
    assert _single_row(ds, "u2", "p1", feats).isr == 0


def test_ecdf_all_equal_high_suspicious():
    out = ecdf_normalize([3.0, 3.0, 3.0], high_is_suspicious=True)
    assert np.all(out == 0.0)


def test_ecdf_spec_examples():
    values = [1.0, 2.0, 3.0, 4.0]
    high = ecdf_normalize(values, high_is_suspicious=True)
    assert high[3] == 0.0  # query 4: 1 - 4/4
    low = ecdf_normalize(values, high_is_suspicious=False)
    assert low[0] == 0.25  # query 1: 1/4


def test_ecdf_bounds_and_direction():
    rng = np.random.default_rng(3)
    values = rng.normal(size=200)
    order = np.argsort(values)
    for high in (True, False):
        f = ecdf_normalize(values, high)
        assert ((0 <= f) & (f <= 1)).all()
        sorted_f = f[order]
        diffs = np.diff(sorted_f)
        assert (diffs <= 1e-15).all() if high else (diffs >= -1e-15).all()


def test_ecdf_rejects_empty():
    with pytest.raises(ValueError):
        ecdf_normalize([], True)


def test_combine_prior_bounds():
    assert combine_prior([0.0, 0.0, 0.0]) == 1.0
    assert combine_prior([1.0, 1.0]) == 0.0
    assert abs(combine_prior([0.6, 0.8]) - (1 - math.sqrt(0.5))) < 1e-12


def test_combine_prior_monotone():
    rng = np.random.default_rng(17)
    for _ in range(200):
        f = rng.uniform(0, 1, size=6)
        j = int(rng.integers(0, 6))
        lower = f.copy()
        lower[j] = max(0.0, f[j] - rng.uniform(0, f[j] + 1e-12))
        assert combine_prior(lower) >= combine_prior(f) - 1e-15


def test_reviewer_lift_is_max():
    ds = make_dataset([
        ("u1", "p1", 5, 0), ("u1", "p2", 5, 0), ("u1", "p3", 5, 0),
        ("u2", "p1", 1, 0),
    ])
    priors = np.zeros(len(ds.reviews))
    u1 = ds.reviewer_index["u1"]
    for p, val in (("p1", 0.2), ("p2", 0.9), ("p3", 0.4)):
        priors[ds.per_reviewer[u1][ds.product_index[p]]] = val
    priors[ds.per_reviewer[ds.reviewer_index["u2"]][ds.product_index["p1"]]] = 0.3
    lifted = reviewer_prior_from_reviews(ds, priors)
    assert lifted[u1] == 0.9
    assert lifted[ds.reviewer_index["u2"]] == 0.3


def test_reviewer_lift_matches_rewalk_oracle():
    rows = []
    rng = np.random.default_rng(23)
    for r in range(40):
        for p in rng.choice(12, size=int(rng.integers(1, 5)), replace=False):
            rows.append((f"u{r:02d}", f"p{p:02d}", int(rng.integers(1, 6)), int(rng.integers(0, 300))))
    ds = make_dataset(rows)
    per_review = review_priors(ds)
    lifted = reviewer_prior_from_reviews(ds, per_review)
    # independent re-walk, review by review
    best: dict[str, float] = {}
    for idx, record in enumerate(ds.reviews):
        best[record.reviewer_id] = max(best.get(record.reviewer_id, 0.0), per_review[idx])
    for rid, value in best.items():
        assert abs(lifted[ds.reviewer_index[rid]] - value) < 1e-15


def test_all_prior_in_bounds_and_full_length():
    rows = [("u1", "p1", 5, 0), ("u2", "p1", 4, 3), ("u2", "p2", 1, 9)]
    ds = make_dataset(rows)
    prior = all_prior(ds)
    assert prior.source == "all"
    assert len(prior.values) == ds.n_reviewers
    assert ((prior.values >= 0) & (prior.values <= 1)).all()
