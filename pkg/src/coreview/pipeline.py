"""End-to-end driver: parse, build graphs, priors, inference, rankings, files.

Every artifact starts with a comment line naming the producing stage, the
hash of the algorithmic configuration, and the schema version, so outputs
from different runs and stages can be told apart. Identical configuration
and inputs yield byte-identical rankings and groups files.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import data as data_mod
from .data import Dataset, load_reviewer_labels, parse_reviews
from .errors import ConfigError, PipelineError
from .graph import CoReviewParams, ReviewerGraph, build_graphs, write_graph_tsv
from .inference import LbpResult, lbp_run, potentials_from_prior
from .priors import (
    PRIOR_ALL,
    PRIOR_FILE,
    PRIOR_NEUTRAL,
    PRIOR_NT,
    CandidateGroup,
    PriorVector,
    all_prior,
    load_prior_file,
    neutral_prior,
    nt_prior,
    write_groups_file,
    write_prior_file,
)
from .ranking import RankedEntry, ndcg_at_k, rank_groups, rank_reviewers
from .scan import scan_cluster

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

PRIOR_MODES = (PRIOR_NT, PRIOR_ALL, PRIOR_FILE, PRIOR_NEUTRAL)

DEFAULT_TOP_K = tuple(range(100, 2001, 100))


@dataclass(frozen=True)
class RunConfig:
    input: Path
    out: Path
    labels: Path | None = None
    fmt: str = data_mod.FOUR_COLUMN
    prior_mode: str = PRIOR_NT
    prior_file: Path | None = None
    delta: float = 0.6
    delta_prime: float = 0.5
    sigma1: float = 90.0
    sigma2: float = 3.0
    scan_epsilon: float = 0.6
    scan_mu: int = 2
    conv_tol: float = 1e-5
    max_iters: int = 30
    damping: float = 0.0
    top_k: tuple[int, ...] = DEFAULT_TOP_K
    per_product_cap: int | None = None
    etf_window_days: int = 240
    dev_threshold: float = 0.63
    nt_fallback: float = 0.5
    seed: int = 0  # used by synthetic generation only

    def __post_init__(self):
        object.__setattr__(self, "input", Path(self.input))
        object.__setattr__(self, "out", Path(self.out))
        if self.labels is not None:
            object.__setattr__(self, "labels", Path(self.labels))
        if self.prior_file is not None:
            object.__setattr__(self, "prior_file", Path(self.prior_file))
        object.__setattr__(self, "top_k", tuple(int(k) for k in self.top_k))
        self.validate()

    def validate(self) -> None:
        if self.fmt not in (data_mod.FOUR_COLUMN, data_mod.FIVE_COLUMN):
            raise ConfigError(f"unknown input format {self.fmt!r}")
        if self.prior_mode not in PRIOR_MODES:
            raise ConfigError(f"prior_mode must be one of {PRIOR_MODES}")
        if self.prior_mode == PRIOR_FILE and self.prior_file is None:
            raise ConfigError("prior_mode=file requires prior_file")
        if not (0 < self.delta <= 1) or not (0 < self.delta_prime <= 1):
            raise ConfigError("delta and delta_prime must lie in (0, 1]")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ConfigError("sigma1 and sigma2 must be positive")
        if not (0 < self.scan_epsilon <= 1):
            raise ConfigError("scan_epsilon must lie in (0, 1]")
        if self.scan_mu < 2:
            raise ConfigError("scan_mu must be >= 2")
        if self.conv_tol <= 0:
            raise ConfigError("conv_tol must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if not (0 <= self.damping < 1):
            raise ConfigError("damping must lie in [0, 1)")
        if not self.top_k or any(k < 1 for k in self.top_k):
            raise ConfigError("top_k entries must be >= 1")
        if self.per_product_cap is not None and self.per_product_cap < 2:
            raise ConfigError("per_product_cap must be >= 2")
        if self.etf_window_days < 1:
            raise ConfigError("etf_window_days must be >= 1")
        if not (0 <= self.dev_threshold <= 1):
            raise ConfigError("dev_threshold must lie in [0, 1]")
        if not (0 <= self.nt_fallback <= 1):
            raise ConfigError("nt_fallback must lie in [0, 1]")

    # algorithmic knobs only: paths do not change what is computed
    _HASH_FIELDS = (
        "fmt", "prior_mode", "delta", "delta_prime", "sigma1", "sigma2",
        "scan_epsilon", "scan_mu", "conv_tol", "max_iters", "damping",
        "top_k", "per_product_cap", "etf_window_days", "dev_threshold",
        "nt_fallback",
    )

    def config_hash(self) -> str:
        text = "\n".join(f"{name}={getattr(self, name)!r}" for name in self._HASH_FIELDS)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]

    def params(self) -> CoReviewParams:
        return CoReviewParams(sigma1=self.sigma1, sigma2=self.sigma2)


@dataclass
class RunArtifacts:
    """Paths of everything a run wrote, plus in-memory results for callers."""

    config: RunConfig
    dataset: Dataset
    primary: ReviewerGraph
    companion: ReviewerGraph
    prior: PriorVector
    groups: list[CandidateGroup]
    lbp: LbpResult
    ranking: list[RankedEntry]
    ranked_groups: list[CandidateGroup]
    labels: dict[str, str]
    metrics: list[tuple[int, float]]
    paths: dict[str, Path] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)


def _header(stage: str, cfg: RunConfig) -> str:
    return f"# stage={stage} config={cfg.config_hash()} schema={SCHEMA_VERSION}\n"


class _StageTimer:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self._stage = None
        self._t0 = 0.0

    def start(self, stage: str) -> str:
        self._stage = stage
        self._t0 = time.perf_counter()
        return stage

    def stop(self) -> None:
        if self._stage is not None:
            self.timings[self._stage] = time.perf_counter() - self._t0
            self._stage = None


def compute_prior(
    config: RunConfig,
    dataset: Dataset,
    companion: ReviewerGraph,
    groups: list[CandidateGroup],
) -> PriorVector:
    """Node prior per the configured mode; `groups` get nt filled either way."""
    nt_vector, _ = nt_prior(groups, companion, dataset, config.params(), fallback=config.nt_fallback)
    if config.prior_mode == PRIOR_NT:
        return nt_vector
    if config.prior_mode == PRIOR_ALL:
        return all_prior(dataset, config.etf_window_days, config.dev_threshold)
    if config.prior_mode == PRIOR_FILE:
        prior, report = load_prior_file(config.prior_file, dataset)
        if report.rejected:
            log.warning("prior file: %d lines rejected", report.rejected)
        return prior
    return neutral_prior(dataset.n_reviewers)


def run_pipeline(config: RunConfig) -> RunArtifacts:
    """Execute the full detection pipeline and write all artifacts.

    Stages: parse -> graphs -> scan/priors -> inference -> ranking -> write.
    On failure, files created by this run are removed and a PipelineError
    naming the failing stage is raised.
    """
    config.out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    timer = _StageTimer()
    stage = "setup"
    try:
        stage = timer.start("parse")
        dataset = parse_reviews(config.input, config.fmt)
        labels = dict(dataset.reviewer_labels)
        if config.labels is not None:
            file_labels, label_report = load_reviewer_labels(config.labels)
            if label_report.rejected:
                log.warning("label file: %d lines rejected", label_report.rejected)
            labels.update(file_labels)
        timer.stop()

        stage = timer.start("graphs")
        primary, companion = build_graphs(
            dataset, config.params(), config.delta, config.delta_prime, config.per_product_cap
        )
        timer.stop()

        stage = timer.start("priors")
        groups = scan_cluster(companion, config.scan_epsilon, config.scan_mu)
        prior = compute_prior(config, dataset, companion, groups)
        timer.stop()

        stage = timer.start("inference")
        lbp = lbp_run(
            primary,
            potentials_from_prior(prior.values),
            conv_tol=config.conv_tol,
            max_iters=config.max_iters,
            damping=config.damping,
        )
        timer.stop()

        stage = timer.start("ranking")
        ranking = rank_reviewers(lbp.spam_scores, dataset.reviewer_ids)
        ranked_groups = rank_groups(groups, lbp.spam_scores)
        metrics: list[tuple[int, float]] = []
        if labels:
            ranked_ids = [e.reviewer_id for e in ranking]
            for k in config.top_k:
                metrics.append((k, ndcg_at_k(ranked_ids, labels, k)))
        timer.stop()

        stage = timer.start("write")
        paths = _write_artifacts(
            config, dataset, prior, lbp, ranking, ranked_groups, labels, metrics, timer.timings, created
        )
        timer.stop()
    except Exception as exc:
        timer.stop()
        for path in created:
            path.unlink(missing_ok=True)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(stage, str(exc)) from exc

    return RunArtifacts(
        config=config,
        dataset=dataset,
        primary=primary,
        companion=companion,
        prior=prior,
        groups=groups,
        lbp=lbp,
        ranking=ranking,
        ranked_groups=ranked_groups,
        labels=labels,
        metrics=metrics,
        paths=paths,
        timings=timer.timings,
    )


def _open_artifact(path: Path, created: list[Path]):
    created.append(path)
    return open(path, "w", encoding="utf-8", newline="")


def _write_artifacts(
    config: RunConfig,
    dataset: Dataset,
    prior: PriorVector,
    lbp: LbpResult,
    ranking: list[RankedEntry],
    ranked_groups: list[CandidateGroup],
    labels: dict[str, str],
    metrics: list[tuple[int, float]],
    timings: dict[str, float],
    created: list[Path],
) -> dict[str, Path]:
    out = config.out
    paths = {
        "parse_report": out / "parse_report.txt",
        "rankings": out / "rankings.csv",
        "groups": out / "groups.csv",
        "meta": out / "meta.txt",
    }
    if metrics:
        paths["metrics"] = out / "metrics.csv"

    with _open_artifact(paths["parse_report"], created) as fh:
        fh.write(_header("parse", config))
        for line in dataset.report.summary_lines():
            fh.write(line + "\n")

    idx_of = dataset.reviewer_index
    with _open_artifact(paths["rankings"], created) as fh:
        fh.write(_header("ranking", config))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "reviewer_id", "spam_belief", "prior", "participated", "label"])
        for e in ranking:
            i = idx_of[e.reviewer_id]
            writer.writerow([
                e.rank,
                e.reviewer_id,
                f"{e.score:.12g}",
                f"{prior.values[i]:.12g}",
                int(bool(lbp.participated[i])),
                labels.get(e.reviewer_id, ""),
            ])

    with _open_artifact(paths["groups"], created) as fh:
        fh.write(_header("ranking", config))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group_rank", "group_id", "size", "nt", "posterior", "members"])
        group_ids = {id(g): gid for gid, g in enumerate(sorted(ranked_groups, key=lambda g: g.members))}
        for pos, g in enumerate(ranked_groups, start=1):
            writer.writerow([
                pos,
                group_ids[id(g)],
                len(g.members),
                f"{g.nt:.12g}" if g.nt is not None else "",
                f"{g.posterior:.12g}" if g.posterior is not None else "",
                ";".join(dataset.reviewer_ids[i] for i in g.members),
            ])

    if metrics:
        with _open_artifact(paths["metrics"], created) as fh:
            fh.write(_header("metrics", config))
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "ndcg"])
            for k, value in metrics:
                writer.writerow([k, f"{value:.10g}"])

    with _open_artifact(paths["meta"], created) as fh:
        fh.write(_header("meta", config))
        fh.write(f"config_hash={config.config_hash()}\n")
        fh.write(f"schema={SCHEMA_VERSION}\n")
        for f_ in fields(config):
            fh.write(f"config.{f_.name}={getattr(config, f_.name)}\n")
        rep = dataset.report
        fh.write(f"reviews_retained={rep.retained}\n")
        fh.write(f"reviews_rejected={rep.rejected}\n")
        fh.write(f"reviews_deduplicated={rep.deduplicated}\n")
        fh.write(f"reviewers={dataset.n_reviewers}\n")
        fh.write(f"products={dataset.n_products}\n")
        fh.write(f"prior_source={prior.source}\n")
        fh.write(f"groups={len(ranked_groups)}\n")
        fh.write(f"participating_reviewers={int(lbp.participated.sum())}\n")
        fh.write(f"components={len(lbp.components)}\n")
        fh.write(f"components_converged={sum(1 for c in lbp.components if c.converged)}\n")
        for c in lbp.components:
            fh.write(
                f"component {c.index}: nodes={c.nodes} edges={c.edges} "
                f"iterations={c.iterations} converged={c.converged} "
                f"max_delta={c.max_delta:.3g} seconds={c.seconds:.3f}\n"
            )
        for name, seconds in timings.items():
            fh.write(f"seconds_{name}={seconds:.3f}\n")
    return paths


def dump_graphs(config: RunConfig) -> dict[str, Path]:
    """`graph` subcommand: parse, build, and dump both graphs as TSV."""
    config.out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    try:
        dataset = parse_reviews(config.input, config.fmt)
        primary, companion = build_graphs(
            dataset, config.params(), config.delta, config.delta_prime, config.per_product_cap
        )
        paths = {
            "parse_report": config.out / "parse_report.txt",
            "graph_primary": config.out / "graph_primary.tsv",
            "graph_companion": config.out / "graph_companion.tsv",
        }
        with _open_artifact(paths["parse_report"], created) as fh:
            fh.write(_header("parse", config))
            for line in dataset.report.summary_lines():
                fh.write(line + "\n")
        for key, graph in (("graph_primary", primary), ("graph_companion", companion)):
            with _open_artifact(paths[key], created) as fh:
                fh.write(_header("graphs", config))
                write_graph_tsv(graph, dataset.reviewer_ids, fh)
    except Exception as exc:
        for path in created:
            path.unlink(missing_ok=True)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError("graphs", str(exc)) from exc
    return paths


def dump_priors(config: RunConfig) -> dict[str, Path]:
    """`priors` subcommand: compute and dump priors (and groups for nt)."""
    config.out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    try:
        dataset = parse_reviews(config.input, config.fmt)
        paths = {"priors": config.out / "priors.tsv"}
        if config.prior_mode in (PRIOR_NT,):
            _, companion = build_graphs(
                dataset, config.params(), config.delta, config.delta_prime, config.per_product_cap
            )
            groups = scan_cluster(companion, config.scan_epsilon, config.scan_mu)
            prior = compute_prior(config, dataset, companion, groups)
            paths["groups"] = config.out / "groups.tsv"
            with _open_artifact(paths["groups"], created) as fh:
                fh.write(_header("priors", config))
                write_groups_file(groups, dataset.reviewer_ids, fh)
        elif config.prior_mode == PRIOR_ALL:
            prior = all_prior(dataset, config.etf_window_days, config.dev_threshold)
        elif config.prior_mode == PRIOR_FILE:
            prior, report = load_prior_file(config.prior_file, dataset)
            if report.rejected:
                log.warning("prior file: %d lines rejected", report.rejected)
        else:
            prior = neutral_prior(dataset.n_reviewers)
        with _open_artifact(paths["priors"], created) as fh:
            fh.write(_header("priors", config))
            write_prior_file(prior, dataset.reviewer_ids, fh)
    except Exception as exc:
        for path in created:
            path.unlink(missing_ok=True)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError("priors", str(exc)) from exc
    return paths


def read_ranking_ids(path: str | Path) -> list[str]:
    """Reviewer ids, in rank order, from a rankings.csv artifact."""
    ids: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows, None)
        if header is None or "reviewer_id" not in header:
            raise ValueError(f"{path}: not a rankings file")
        col = header.index("reviewer_id")
        for row in rows:
            if row:
                ids.append(row[col])
    return ids


def evaluate_ranking(
    ranking_path: str | Path,
    labels_path: str | Path,
    top_k: tuple[int, ...],
    out_dir: str | Path,
    config: RunConfig | None = None,
) -> Path:
    """`eval` subcommand: NDCG@k grid from an existing ranking + labels."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ranked_ids = read_ranking_ids(ranking_path)
    labels, report = load_reviewer_labels(labels_path)
    if report.rejected:
        log.warning("label file: %d lines rejected", report.rejected)
    header_cfg = config if config is not None else RunConfig(input=ranking_path, out=out_dir, top_k=top_k)
    path = out_dir / "metrics.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_header("metrics", header_cfg))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "ndcg"])
        for k in top_k:
            writer.writerow([k, f"{ndcg_at_k(ranked_ids, labels, k):.10g}"])
    return path
