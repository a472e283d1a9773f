"""Review metadata parsing, validation, deduplication, and indexing.

Input is tab-separated review metadata, one review per line:

    four_column:  reviewer_id TAB product_id TAB rating TAB date
    five_column:  reviewer_id TAB product_id TAB rating TAB label TAB date

with rating an integer star in 1..5, date in YYYY-MM-DD, and label -1 (fake)
or +1 (genuine). A reviewer-label file holds "reviewer_id TAB label" lines
with label in {-1, +1, spammer, benign}.
"""

from __future__ import annotations

import datetime
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, TextIO, Union

import numpy as np

from .errors import EmptyDatasetError

FOUR_COLUMN = "four_column"
FIVE_COLUMN = "five_column"

FAKE = "fake"
GENUINE = "genuine"
SPAMMER = "spammer"
BENIGN = "benign"

Source = Union[str, Path, BinaryIO, TextIO]

_MAX_REPORT_DETAILS = 100


@dataclass(frozen=True)
class ReviewRecord:
    """One review event; `day` is the proleptic-Gregorian day ordinal."""

    reviewer_id: str
    product_id: str
    rating: int
    date: datetime.date
    label: str | None = None

    @property
    def day(self) -> int:
        return self.date.toordinal()


@dataclass
class ParseReport:
    """Counts and per-line rejection records from one parse pass."""

    lines: int = 0
    blank: int = 0
    retained: int = 0
    rejected: int = 0
    deduplicated: int = 0
    rejects: list[tuple[int, str]] = field(default_factory=list)

    def add_reject(self, line_no: int, reason: str) -> None:
        self.rejected += 1
        self.rejects.append((line_no, reason))

    def summary_lines(self) -> list[str]:
        out = [
            f"lines={self.lines}",
            f"blank={self.blank}",
            f"retained={self.retained}",
            f"rejected={self.rejected}",
            f"deduplicated={self.deduplicated}",
        ]
        for line_no, reason in self.rejects[:_MAX_REPORT_DETAILS]:
            out.append(f"reject line {line_no}: {reason}")
        if len(self.rejects) > _MAX_REPORT_DETAILS:
            out.append(f"... {len(self.rejects) - _MAX_REPORT_DETAILS} more rejects")
        return out


@dataclass
class Dataset:
    """Deduplicated, densely indexed review data.

    Dense reviewer/product ids follow the sorted order of the original string
    ids, so dense-id order and byte-wise id order coincide everywhere.
    `per_reviewer[i]` maps product dense id -> index into `reviews`;
    `per_product[p]` lists review indices sorted by reviewer dense id.
    """

    reviews: list[ReviewRecord]
    reviewer_ids: list[str]
    product_ids: list[str]
    reviewer_index: dict[str, int]
    product_index: dict[str, int]
    per_reviewer: list[dict[int, int]]
    per_product: list[np.ndarray]
    reviewer_labels: dict[str, str]
    report: ParseReport

    # column arrays over `reviews`, aligned by review index
    reviewer_of: np.ndarray = field(repr=False, default=None)
    product_of: np.ndarray = field(repr=False, default=None)
    day_of: np.ndarray = field(repr=False, default=None)
    rating_of: np.ndarray = field(repr=False, default=None)

    @property
    def n_reviewers(self) -> int:
        return len(self.reviewer_ids)

    @property
    def n_products(self) -> int:
        return len(self.product_ids)

    def products_of(self, reviewer: int):
        """Key view over the product dense ids reviewed by `reviewer`."""
        return self.per_reviewer[reviewer].keys()

    def review_of(self, reviewer: int, product: int) -> ReviewRecord:
        return self.reviews[self.per_reviewer[reviewer][product]]

    def content_equal(self, other: "Dataset") -> bool:
        """Equality over retained reviews, indices, and reviewer labels."""
        return (
            self.reviews == other.reviews
            and self.reviewer_ids == other.reviewer_ids
            and self.product_ids == other.product_ids
            and self.reviewer_labels == other.reviewer_labels
        )


def _open_lines(source: Source):
    """Yield (line_number, text) from a path or byte/text stream."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from _open_lines(fh)
        return
    data = source.read()
    if isinstance(data, bytes):
        lines = data.split(b"\n")
    else:
        lines = data.split("\n")
    if lines and not lines[-1]:
        lines.pop()  # artifact of a trailing newline, not a blank line
    for i, raw in enumerate(lines, start=1):
        yield i, raw


def _decode(raw) -> str | None:
    if isinstance(raw, bytes):
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            return None
    return raw


def _parse_rating(token: str) -> int | None:
    try:
        value = float(token)
    except ValueError:
        return None
    rounded = round(value)
    if abs(value - rounded) > 1e-9 or not 1 <= rounded <= 5:
        return None
    return int(rounded)


def _parse_date(token: str) -> datetime.date | None:
    try:
        return datetime.date.fromisoformat(token)
    except ValueError:
        return None


_REVIEW_LABELS = {"-1": FAKE, "+1": GENUINE, "1": GENUINE}


def parse_reviews(source: Source, fmt: str = FOUR_COLUMN) -> Dataset:
    """Parse review metadata into a deduplicated, indexed Dataset.

    Keeps the earliest-dated review per (reviewer, product) pair (first
    occurrence wins on equal dates); raw duplicates still contribute to
    reviewer-label derivation: a reviewer is a spammer iff any raw review
    of theirs is labeled fake. Malformed lines are counted in the report,
    never silently dropped.

    Raises EmptyDatasetError when no valid review line is found.
    """
    if fmt not in (FOUR_COLUMN, FIVE_COLUMN):
        raise ValueError(f"unknown format {fmt!r}")
    want_cols = 4 if fmt == FOUR_COLUMN else 5

    report = ParseReport()
    best: dict[tuple[str, str], ReviewRecord] = {}
    fake_seen: set[str] = set()
    seen_reviewers: set[str] = set()

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
        if len(cols) != want_cols:
            report.add_reject(line_no, f"expected {want_cols} columns, got {len(cols)}")
            continue
        if fmt == FOUR_COLUMN:
            rid, pid, rating_tok, date_tok = cols
            label_tok = None
        else:
            rid, pid, rating_tok, label_tok, date_tok = cols
        rating = _parse_rating(rating_tok)
        if rating is None:
            report.add_reject(line_no, f"bad rating {rating_tok!r}")
            continue
        date = _parse_date(date_tok)
        if date is None:
            report.add_reject(line_no, f"bad date {date_tok!r}")
            continue
        label = None
        if label_tok is not None:
            label = _REVIEW_LABELS.get(label_tok.strip())
            if label is None:
                report.add_reject(line_no, f"bad label {label_tok!r}")
                continue

        seen_reviewers.add(rid)
        if label == FAKE:
            fake_seen.add(rid)
        key = (rid, pid)
        prev = best.get(key)
        if prev is None:
            best[key] = ReviewRecord(rid, pid, rating, date, label)
        else:
            report.deduplicated += 1
            if date < prev.date:
                best[key] = ReviewRecord(rid, pid, rating, date, label)

    if not best:
        raise EmptyDatasetError("no valid review lines in input")

    labels: dict[str, str] = {}
    if fmt == FIVE_COLUMN:
        labels = {rid: (SPAMMER if rid in fake_seen else BENIGN) for rid in seen_reviewers}

    dataset = _build_dataset(list(best.values()), labels, report)
    report.retained = len(dataset.reviews)
    return dataset


def _build_dataset(records: list[ReviewRecord], labels: dict[str, str], report: ParseReport) -> Dataset:
    reviewer_ids = sorted({r.reviewer_id for r in records})
    product_ids = sorted({r.product_id for r in records})
    reviewer_index = {rid: i for i, rid in enumerate(reviewer_ids)}
    product_index = {pid: i for i, pid in enumerate(product_ids)}

    records.sort(key=lambda r: (reviewer_index[r.reviewer_id], product_index[r.product_id]))

    n = len(records)
    reviewer_of = np.fromiter((reviewer_index[r.reviewer_id] for r in records), dtype=np.int64, count=n)
    product_of = np.fromiter((product_index[r.product_id] for r in records), dtype=np.int64, count=n)
    day_of = np.fromiter((r.day for r in records), dtype=np.int64, count=n)
    rating_of = np.fromiter((r.rating for r in records), dtype=np.int64, count=n)

    per_reviewer: list[dict[int, int]] = [dict() for _ in reviewer_ids]
    for idx in range(n):
        per_reviewer[reviewer_of[idx]][int(product_of[idx])] = idx

    # records are sorted by (reviewer, product), so a product-major ordering
    # of review indices is sorted by reviewer dense id within each product
    order = np.lexsort((reviewer_of, product_of))
    per_product: list[np.ndarray] = []
    bounds = np.searchsorted(product_of[order], np.arange(len(product_ids) + 1))
    for p in range(len(product_ids)):
        per_product.append(order[bounds[p]:bounds[p + 1]])

    return Dataset(
        reviews=records,
        reviewer_ids=reviewer_ids,
        product_ids=product_ids,
        reviewer_index=reviewer_index,
        product_index=product_index,
        per_reviewer=per_reviewer,
        per_product=per_product,
        reviewer_labels=labels,
        report=report,
        reviewer_of=reviewer_of,
        product_of=product_of,
        day_of=day_of,
        rating_of=rating_of,
    )


_REVIEWER_LABELS = {"-1": SPAMMER, "+1": BENIGN, "1": BENIGN, SPAMMER: SPAMMER, BENIGN: BENIGN}


def load_reviewer_labels(source: Source) -> tuple[dict[str, str], ParseReport]:
    """Parse a reviewer-label file into {reviewer_id: 'spammer'|'benign'}.

    Reviewers absent from the map are unlabeled and are excluded from
    metric denominators downstream. Unknown label tokens are rejected
    per line in the returned report.
    """
    report = ParseReport()
    labels: dict[str, str] = {}
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
        rid, token = cols
        label = _REVIEWER_LABELS.get(token.strip())
        if label is None:
            report.add_reject(line_no, f"bad label {token!r}")
            continue
        labels[rid] = label
        report.retained += 1
    return labels, report


def write_reviews(dataset: Dataset, stream: TextIO, fmt: str = FOUR_COLUMN) -> None:
    """Serialize retained reviews as TSV in (reviewer, product) order."""
    for r in dataset.reviews:
        if fmt == FOUR_COLUMN:
            stream.write(f"{r.reviewer_id}\t{r.product_id}\t{r.rating}\t{r.date.isoformat()}\n")
        elif fmt == FIVE_COLUMN:
            tok = "-1" if r.label == FAKE else "+1"
            stream.write(f"{r.reviewer_id}\t{r.product_id}\t{r.rating}\t{tok}\t{r.date.isoformat()}\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")


def reviews_to_bytes(dataset: Dataset, fmt: str = FOUR_COLUMN) -> bytes:
    buf = io.StringIO()
    write_reviews(dataset, buf, fmt)
    return buf.getvalue().encode("utf-8")
