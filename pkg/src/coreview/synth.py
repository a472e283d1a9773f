"""Synthetic review data with injected spam campaigns, for verification.

Background reviewers rate uniformly random products at uniformly random
dates over a three-year span; each campaign's members all rate the
campaign's target products with one fixed rating inside a short window.
The generator exists to verify detection mechanics, not to model any real
marketplace.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPAN_DAYS = 3 * 365
_SPAN_START = datetime.date(2012, 1, 1).toordinal()


@dataclass(frozen=True)
class SyntheticSpec:
    background_reviewers: int = 1000
    background_products: int = 200
    reviews_per_reviewer: int = 5
    campaigns: int = 3
    campaign_size: int = 10
    targets_per_campaign: int = 5
    window_days: int = 3
    campaign_rating: int = 5
    seed: int = 0

    def __post_init__(self):
        counts = (
            self.background_reviewers, self.background_products,
            self.reviews_per_reviewer, self.campaigns,
            self.campaign_size, self.targets_per_campaign,
        )
        if any(c < 1 for c in counts):
            raise ValueError("all synthetic counts must be >= 1")
        if self.window_days < 0:
            raise ValueError("window_days must be >= 0")
        if not 1 <= self.campaign_rating <= 5:
            raise ValueError("campaign_rating must be in 1..5")
        if self.reviews_per_reviewer > self.background_products:
            raise ValueError("reviews_per_reviewer cannot exceed background_products")
        if self.targets_per_campaign > self.background_products:
            raise ValueError("targets_per_campaign cannot exceed background_products")


def generate_synthetic(
    spec: SyntheticSpec,
    out_dir: str | Path,
    reviews_name: str = "reviews.tsv",
    labels_name: str = "labels.tsv",
) -> tuple[Path, Path]:
    """Write a four-column review file and a reviewer-label file.

    Campaign members are labeled -1 (spammer), background reviewers +1.
    Output bytes are a pure function of the spec, including its seed.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    review_rows: list[str] = []
    label_rows: list[str] = []

    p_width = len(str(spec.background_products - 1))

    def product_id(p: int) -> str:
        return f"prod{p:0{p_width}d}"

    def day_str(ordinal: int) -> str:
        return datetime.date.fromordinal(ordinal).isoformat()

    r_width = len(str(spec.background_reviewers - 1))
    for b in range(spec.background_reviewers):
        rid = f"user{b:0{r_width}d}"
        label_rows.append(f"{rid}\t+1\n")
        prods = rng.choice(spec.background_products, size=spec.reviews_per_reviewer, replace=False)
        for p in np.sort(prods):
            day = _SPAN_START + int(rng.integers(0, SPAN_DAYS))
            rating = int(rng.integers(1, 6))
            review_rows.append(f"{rid}\t{product_id(int(p))}\t{rating}\t{day_str(day)}\n")

    for c in range(spec.campaigns):
        targets = np.sort(rng.choice(spec.background_products, size=spec.targets_per_campaign, replace=False))
        latest_start = max(0, SPAN_DAYS - spec.window_days - 1)
        start = _SPAN_START + int(rng.integers(0, latest_start + 1))
        for m in range(spec.campaign_size):
            rid = f"spam{c:02d}_{m:03d}"
            label_rows.append(f"{rid}\t-1\n")
            for p in targets:
                day = start + int(rng.integers(0, spec.window_days + 1))
                review_rows.append(f"{rid}\t{product_id(int(p))}\t{spec.campaign_rating}\t{day_str(day)}\n")

    reviews_path = out_dir / reviews_name
    labels_path = out_dir / labels_name
    reviews_path.write_bytes("".join(review_rows).encode("utf-8"))
    labels_path.write_bytes("".join(label_rows).encode("utf-8"))
    return reviews_path, labels_path
