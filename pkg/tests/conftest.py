import datetime
import io
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coreview import parse_reviews
from coreview.graph import ReviewerGraph

EPOCH = datetime.date(2012, 1, 1)


def day_str(offset: int) -> str:
    return (EPOCH + datetime.timedelta(days=offset)).isoformat()


def make_dataset(rows, fmt="four_column"):
    """Build a Dataset from (reviewer, product, rating, day_offset) tuples."""
    lines = []
    for row in rows:
        if fmt == "four_column":
            rid, pid, rating, off = row
            lines.append(f"{rid}\t{pid}\t{rating}\t{day_str(off)}")
        else:
            rid, pid, rating, label, off = row
            lines.append(f"{rid}\t{pid}\t{rating}\t{label}\t{day_str(off)}")
    return parse_reviews(io.BytesIO("\n".join(lines).encode()), fmt)


def random_dataset(seed, n_reviewers=200, n_products=40, max_reviews=5, day_span=120):
    """Seeded random dataset dense enough to produce plenty of edges."""
    rng = np.random.default_rng(seed)
    rows = []
    for r in range(n_reviewers):
        rid = f"r{r:04d}"
        count = int(rng.integers(1, max_reviews + 1))
        prods = rng.choice(n_products, size=count, replace=False)
        for p in sorted(prods):
            rows.append((rid, f"p{p:03d}", int(rng.integers(1, 6)), int(rng.integers(0, day_span))))
    return make_dataset(rows)


def graph_from_edges(n, edges, kind="primary", threshold=None):
    if threshold is None:
        threshold = min((w for _, _, w in edges), default=1.0)
    return ReviewerGraph.from_edges(n, edges, kind, threshold)


@pytest.fixture
def two_campaign_rows():
    """Tiny dataset: one tight 3-member campaign plus scattered background."""
    rows = []
    for m in range(3):
        for p in ("tp0", "tp1"):
            rows.append((f"spam{m}", p, 5, 10 + m))
    rows += [
        ("bg0", "tp0", 3, 400),
        ("bg1", "q0", 4, 50),
        ("bg1", "q1", 2, 300),
        ("bg2", "q1", 5, 700),
    ]
    return rows
