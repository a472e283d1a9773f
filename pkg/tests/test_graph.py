import logging
import math

import numpy as np
import pytest

from coreview import (
    CoReviewParams,
    ReviewerGraph,
    build_graphs,
    co_review_similarity,
    collusiveness,
    jaccard_products,
    standard_normal_cdf,
)

from conftest import make_dataset, random_dataset
from oracles import (
    PUBLISHED_CDF_TABLE,
    brute_force_graphs,
    graph_to_dict,
    normal_cdf_series,
)

PARAMS = CoReviewParams(sigma1=90.0, sigma2=3.0)

# frozen from the series oracle (see test_oracle_agrees_with_tables):
# 4 * Phi(-1)^2 and 2 * Phi(-1)
FOUR_PHI_SQ = 0.10068595840022047
TWO_PHI = 0.3173105078629141


def test_oracle_agrees_with_tables():
    for x, expected in PUBLISHED_CDF_TABLE.items():
        assert abs(float(normal_cdf_series(x)) - expected) < 5e-6


def test_cdf_matches_oracle_to_1e12():
    xs = np.linspace(-8, 8, 201)
    for x in xs:
        ours = standard_normal_cdf(float(x))
        ref = float(normal_cdf_series(float(x)))
        assert abs(ours - ref) <= 1e-12 * max(ref, 1e-300)


def test_frozen_constants_match_oracle():
    phi_m1 = normal_cdf_series(-1.0)
    assert abs(4 * phi_m1 ** 2 - FOUR_PHI_SQ) < 1e-15
    assert abs(2 * phi_m1 - TWO_PHI) < 1e-15


def test_similarity_identity_case_exact():
    assert co_review_similarity(0, 0, PARAMS) == 1.0


def test_similarity_spot_values():
    assert abs(co_review_similarity(90, 3, PARAMS) - FOUR_PHI_SQ) < 1e-6
    assert abs(co_review_similarity(0, 3, PARAMS) - TWO_PHI) < 1e-6
    assert abs(co_review_similarity(90, 0, PARAMS) - TWO_PHI) < 1e-6


def test_similarity_bounds_and_identity_condition():
    rng = np.random.default_rng(7)
    for _ in range(500):
        dt = int(rng.integers(0, 1000))
        dp = int(rng.integers(0, 5))
        s = co_review_similarity(dt, dp, PARAMS)
        assert 0 < s <= 1
        assert (s == 1.0) == (dt == 0 and dp == 0)


def test_similarity_monotonicity_randomized_grid():
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        params = CoReviewParams(sigma1=float(rng.uniform(1, 200)), sigma2=float(rng.uniform(0.5, 10)))
        dt, dp = float(rng.uniform(0, 500)), float(rng.uniform(0, 4))
        step_t, step_p = float(rng.uniform(0, 100)), float(rng.uniform(0, 2))
        base = co_review_similarity(dt, dp, params)
        assert co_review_similarity(dt + step_t, dp, params) <= base
        assert co_review_similarity(dt, dp + step_p, params) <= base


def test_sign_of_gaps_is_irrelevant():
    assert co_review_similarity(-30, -2, PARAMS) == co_review_similarity(30, 2, PARAMS)


def test_params_validation():
    with pytest.raises(ValueError):
        CoReviewParams(sigma1=0)
    with pytest.raises(ValueError):
        CoReviewParams(sigma2=-1)


def test_collusiveness_no_shared_product():
    ds = make_dataset([("u1", "p1", 5, 0), ("u2", "p2", 5, 0)])
    assert collusiveness(0, 1, ds, PARAMS) == 0.0


def test_collusiveness_identity_pair():
    ds = make_dataset([("u1", "p1", 5, 0), ("u2", "p1", 5, 0)])
    assert collusiveness(0, 1, ds, PARAMS) == 1.0


def test_collusiveness_takes_max_over_products():
    ds = make_dataset([
        ("u1", "pA", 5, 0), ("u2", "pA", 2, 90),   # dt=90, dpsi=3
        ("u1", "pB", 5, 10), ("u2", "pB", 2, 10),  # dt=0, dpsi=3
    ])
    got = collusiveness(0, 1, ds, PARAMS)
    assert abs(got - TWO_PHI) < 1e-6
    assert got > FOUR_PHI_SQ


def test_collusiveness_rejects_same_reviewer():
    ds = make_dataset([("u1", "p1", 5, 0)])
    with pytest.raises(ValueError):
        collusiveness(0, 0, ds, PARAMS)


def test_build_graphs_single_edge():
    ds = make_dataset([("u1", "p1", 5, 0), ("u2", "p1", 5, 0)])
    primary, companion = build_graphs(ds, PARAMS, delta=0.6, delta_prime=0.5)
    assert graph_to_dict(primary, ds.reviewer_ids) == {("u1", "u2"): 1.0}
    assert graph_to_dict(companion, ds.reviewer_ids) == {("u1", "u2"): 1.0}


def test_companion_jaccard_can_drop_edge():
    # u1 reviews 3 products, u2 just the shared one: jaccard 1/3
    ds = make_dataset([
        ("u1", "p1", 5, 0), ("u1", "p2", 3, 50), ("u1", "p3", 4, 80),
        ("u2", "p1", 5, 0),
    ])
    primary, companion = build_graphs(ds, PARAMS, delta=0.6, delta_prime=0.5)
    assert graph_to_dict(primary, ds.reviewer_ids) == {("u1", "u2"): 1.0}
    assert companion.edge_count == 0
    assert abs(jaccard_products(ds, 0, 1) - 1 / 3) < 1e-15


def test_build_graphs_matches_brute_force_oracle():
    ds = random_dataset(seed=2024)
    primary, companion = build_graphs(ds, PARAMS, delta=0.6, delta_prime=0.5)
    ref_primary, ref_companion = brute_force_graphs(ds, PARAMS, 0.6, 0.5)
    for got_graph, ref in ((primary, ref_primary), (companion, ref_companion)):
        got = graph_to_dict(got_graph, ds.reviewer_ids)
        assert set(got) == set(ref)
        for key in got:
            assert abs(got[key] - ref[key]) <= 1e-12
    assert primary.edge_count > 0 and companion.edge_count > 0


def test_threshold_monotonicity():
    ds = random_dataset(seed=5)
    lo, _ = build_graphs(ds, PARAMS, delta=0.5, delta_prime=0.5)
    hi, _ = build_graphs(ds, PARAMS, delta=0.8, delta_prime=0.5)
    lo_edges = set((i, j) for i, j, _ in lo.iter_edges())
    hi_edges = set((i, j) for i, j, _ in hi.iter_edges())
    assert hi_edges <= lo_edges
    assert len(hi_edges) < len(lo_edges)


def test_companion_subset_of_primary_at_equal_threshold():
    ds = random_dataset(seed=9)
    primary, companion = build_graphs(ds, PARAMS, delta=0.6, delta_prime=0.6)
    p_edges = set((i, j) for i, j, _ in primary.iter_edges())
    c_edges = set((i, j) for i, j, _ in companion.iter_edges())
    assert c_edges <= p_edges


def test_graph_invariants():
    ds = random_dataset(seed=11)
    primary, companion = build_graphs(ds, PARAMS, delta=0.6, delta_prime=0.5)
    primary.validate()
    companion.validate()


def test_per_product_cap_keeps_earliest(caplog):
    # p1 has 4 reviews; cap 2 keeps the two earliest (u3 day0, u1 day1)
    ds = make_dataset([
        ("u1", "p1", 5, 1), ("u2", "p1", 5, 9), ("u3", "p1", 5, 0), ("u4", "p1", 5, 9),
    ])
    with caplog.at_level(logging.WARNING):
        primary, _ = build_graphs(ds, PARAMS, delta=0.1, delta_prime=0.1, per_product_cap=2)
    assert "capped" in caplog.text
    edges = graph_to_dict(primary, ds.reviewer_ids)
    assert set(edges) == {("u1", "u3")}


def test_per_product_cap_tie_breaks_by_reviewer_id():
    ds = make_dataset([
        ("u2", "p1", 5, 0), ("u1", "p1", 5, 0), ("u3", "p1", 5, 0),
    ])
    primary, _ = build_graphs(ds, PARAMS, delta=0.1, delta_prime=0.1, per_product_cap=2)
    edges = graph_to_dict(primary, ds.reviewer_ids)
    assert set(edges) == {("u1", "u2")}


def test_build_graphs_threshold_validation():
    ds = make_dataset([("u1", "p1", 5, 0)])
    with pytest.raises(ValueError):
        build_graphs(ds, PARAMS, delta=0.0, delta_prime=0.5)
    with pytest.raises(ValueError):
        build_graphs(ds, PARAMS, delta=0.5, delta_prime=1.5)


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError):
        ReviewerGraph.from_edges(2, [(0, 0, 0.5)], "primary", 0.5)


def test_edge_weight_lookup():
    g = ReviewerGraph.from_edges(3, [(0, 1, 0.7), (1, 2, 0.9)], "primary", 0.7)
    assert g.edge_weight(0, 1) == 0.7
    assert g.edge_weight(1, 0) == 0.7
    assert g.edge_weight(0, 2) is None
    assert g.degree(1) == 2
