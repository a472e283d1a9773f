"""Collusive review-spammer and spam-campaign detection from review metadata.

Pipeline: parse review TSVs, build a co-review weighted reviewer graph and
its sparser companion, derive per-reviewer spam priors (mined-group
tightness, behavioral features, file, or neutral), run sum-product belief
propagation over the pairwise MRF, and rank reviewers and candidate groups
by inferred spamicity.
"""

from .data import (
    Dataset,
    ParseReport,
    ReviewRecord,
    load_reviewer_labels,
    parse_reviews,
    write_reviews,
)
from .errors import (
    ComponentTooLargeError,
    ConfigError,
    CoreviewError,
    EmptyDatasetError,
    InferenceError,
    MetricError,
    PipelineError,
)
from .features import (
    ReviewFeatureRow,
    ReviewFeatures,
    combine_prior,
    compute_review_features,
    ecdf_normalize,
)
from .graph import (
    CoReviewParams,
    ReviewerGraph,
    build_graphs,
    co_review_similarity,
    collusiveness,
    jaccard_products,
    standard_normal_cdf,
    write_graph_tsv,
)
from .inference import (
    ComponentStats,
    LbpResult,
    connected_components,
    edge_potential,
    exact_marginals,
    lbp_run,
    potentials_from_prior,
)
from .pipeline import (
    RunArtifacts,
    RunConfig,
    evaluate_ranking,
    run_pipeline,
)
from .priors import (
    CandidateGroup,
    PriorVector,
    all_prior,
    group_tightness,
    load_prior_file,
    neutral_prior,
    nt_prior,
)
from .ranking import (
    RankedEntry,
    ndcg_at_k,
    overlap_degree,
    rank_groups,
    rank_reviewers,
    similarity_degree,
)
from .scan import scan_cluster, structural_similarity
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
