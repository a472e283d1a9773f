"""Command-line interface.

Subcommands: run (full pipeline), graph (build + dump graphs), priors
(compute + dump priors), eval (NDCG from an existing ranking), synth
(synthetic campaign generator). Every flag can also be given in a config
file of "key = value" lines via --config; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, CoreviewError
from .pipeline import (
    DEFAULT_TOP_K,
    RunConfig,
    dump_graphs,
    dump_priors,
    evaluate_ranking,
    run_pipeline,
)
from .synth import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)


def parse_top_k(text: str) -> tuple[int, ...]:
    """Accept "start:stop:step" or a comma-separated list of k values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid form is start:stop:step")
        start, stop, step = (int(p) for p in parts)
        if step < 1 or stop < start:
            raise ValueError("bad top-k grid")
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(",") if p.strip())


_CONVERTERS = {
    "input": Path, "out": Path, "labels": Path, "prior_file": Path,
    "fmt": str, "prior_mode": str,
    "delta": float, "delta_prime": float, "sigma1": float, "sigma2": float,
    "scan_epsilon": float, "conv_tol": float, "damping": float,
    "dev_threshold": float, "nt_fallback": float,
    "scan_mu": int, "max_iters": int, "per_product_cap": int,
    "etf_window_days": int, "seed": int,
    "top_k": parse_top_k,
    "ranking": Path,
    "background_reviewers": int, "background_products": int,
    "reviews_per_reviewer": int, "campaigns": int, "campaign_size": int,
    "targets_per_campaign": int, "window_days": int, "campaign_rating": int,
}


def load_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = text.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def merge_config(args: argparse.Namespace, known_keys: set[str]) -> dict:
    """Config-file values fill in flags the user did not give explicitly."""
    merged: dict = {}
    if getattr(args, "config", None):
        for key, raw in load_config_file(args.config).items():
            if key not in known_keys:
                raise ConfigError(f"unknown config key {key!r}")
            conv = _CONVERTERS.get(key, str)
            try:
                merged[key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
    for key in known_keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, help="review metadata TSV")
    p.add_argument("--fmt", choices=["four_column", "five_column"], help="input column format")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--config", type=Path, help="config file of key = value lines")


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, help="reviewer-graph edge threshold")
    p.add_argument("--delta-prime", dest="delta_prime", type=float, help="companion-graph edge threshold")
    p.add_argument("--sigma1", type=float, help="time-gap spread, days")
    p.add_argument("--sigma2", type=float, help="rating-gap spread, stars")
    p.add_argument("--per-product-cap", dest="per_product_cap", type=int,
                   help="cap reviews per product during pair enumeration")


def _add_prior_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prior-mode", dest="prior_mode", choices=["nt", "all", "file", "neutral"])
    p.add_argument("--prior-file", dest="prior_file", type=Path, help="reviewer TAB prior file")
    p.add_argument("--scan-epsilon", dest="scan_epsilon", type=float, help="SCAN similarity threshold")
    p.add_argument("--scan-mu", dest="scan_mu", type=int, help="SCAN core neighbor minimum")
    p.add_argument("--etf-window-days", dest="etf_window_days", type=int)
    p.add_argument("--dev-threshold", dest="dev_threshold", type=float)
    p.add_argument("--nt-fallback", dest="nt_fallback", type=float,
                   help="prior for reviewers outside every mined group")


_RUN_KEYS = {
    "input", "out", "labels", "fmt", "prior_mode", "prior_file", "delta",
    "delta_prime", "sigma1", "sigma2", "scan_epsilon", "scan_mu", "conv_tol",
    "max_iters", "damping", "top_k", "per_product_cap", "etf_window_days",
    "dev_threshold", "nt_fallback", "seed",
}

_SYNTH_KEYS = {
    "out", "background_reviewers", "background_products",
    "reviews_per_reviewer", "campaigns", "campaign_size",
    "targets_per_campaign", "window_days", "campaign_rating", "seed",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coreview",
        description="Detect collusive review spammers and spam campaigns from review metadata.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full detection pipeline")
    _add_io_flags(run)
    _add_graph_flags(run)
    _add_prior_flags(run)
    run.add_argument("--labels", type=Path, help="reviewer-label TSV for evaluation")
    run.add_argument("--conv-tol", dest="conv_tol", type=float, help="message convergence tolerance")
    run.add_argument("--max-iters", dest="max_iters", type=int, help="max sweeps per component")
    run.add_argument("--damping", type=float, help="message damping in [0, 1)")
    run.add_argument("--top-k", dest="top_k", type=parse_top_k,
                     help="NDCG grid: start:stop:step or comma list")
    run.add_argument("--seed", type=int, help="kept in run metadata; synthetic use only")

    graph = sub.add_parser("graph", help="build and dump the two reviewer graphs")
    _add_io_flags(graph)
    _add_graph_flags(graph)

    priors = sub.add_parser("priors", help="compute and dump node priors")
    _add_io_flags(priors)
    _add_graph_flags(priors)
    _add_prior_flags(priors)

    ev = sub.add_parser("eval", help="NDCG metrics for an existing ranking")
    ev.add_argument("--ranking", type=Path, help="rankings.csv from a run")
    ev.add_argument("--labels", type=Path, help="reviewer-label TSV")
    ev.add_argument("--top-k", dest="top_k", type=parse_top_k)
    ev.add_argument("--out", type=Path, help="output directory")
    ev.add_argument("--config", type=Path, help="config file of key = value lines")

    synth = sub.add_parser("synth", help="generate a synthetic campaign dataset")
    synth.add_argument("--out", type=Path, help="output directory")
    synth.add_argument("--config", type=Path, help="config file of key = value lines")
    synth.add_argument("--background-reviewers", dest="background_reviewers", type=int)
    synth.add_argument("--background-products", dest="background_products", type=int)
    synth.add_argument("--reviews-per-reviewer", dest="reviews_per_reviewer", type=int)
    synth.add_argument("--campaigns", type=int)
    synth.add_argument("--campaign-size", dest="campaign_size", type=int)
    synth.add_argument("--targets-per-campaign", dest="targets_per_campaign", type=int)
    synth.add_argument("--window-days", dest="window_days", type=int)
    synth.add_argument("--campaign-rating", dest="campaign_rating", type=int)
    synth.add_argument("--seed", type=int)
    return parser


def _require(merged: dict, *keys: str) -> None:
    missing = [k for k in keys if merged.get(k) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            merged = merge_config(args, _RUN_KEYS)
            _require(merged, "input", "out")
            artifacts = run_pipeline(RunConfig(**merged))
            for name, path in sorted(artifacts.paths.items()):
                print(f"{name}: {path}")
            if artifacts.metrics:
                k, value = artifacts.metrics[-1]
                print(f"ndcg@{k} = {value:.4f}")
        elif args.command == "graph":
            merged = merge_config(args, _RUN_KEYS - {"labels", "top_k", "seed"})
            _require(merged, "input", "out")
            for name, path in sorted(dump_graphs(RunConfig(**merged)).items()):
                print(f"{name}: {path}")
        elif args.command == "priors":
            merged = merge_config(args, _RUN_KEYS - {"labels", "top_k", "seed"})
            _require(merged, "input", "out")
            for name, path in sorted(dump_priors(RunConfig(**merged)).items()):
                print(f"{name}: {path}")
        elif args.command == "eval":
            merged = merge_config(args, {"ranking", "labels", "top_k", "out"})
            _require(merged, "ranking", "labels", "out")
            top_k = merged.get("top_k") or DEFAULT_TOP_K
            path = evaluate_ranking(merged["ranking"], merged["labels"], top_k, merged["out"])
            print(f"metrics: {path}")
        elif args.command == "synth":
            merged = merge_config(args, _SYNTH_KEYS)
            _require(merged, "out")
            out = merged.pop("out")
            reviews, labels = generate_synthetic(SyntheticSpec(**merged), out)
            print(f"reviews: {reviews}")
            print(f"labels: {labels}")
    except CoreviewError as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
