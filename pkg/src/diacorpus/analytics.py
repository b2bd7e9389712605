"""Diachronic lexical statistics: lifespans, concordances, per-period counts.

A word's lifespan is the span between its first and last attestation, dated
by the author's death year.  Auto-dated documents are excluded from
attestation analyses by default: using model-assigned dates to study word
histories would be circular.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus_core import DatingStatus, Document


def _dated_docs(
    corpus: Iterable[Document], include_autodated: bool, context: str
) -> list[Document]:
    out = []
    for doc in corpus:
        status = doc.meta.dating_status
        if status is DatingStatus.UNDATED:
            raise ValueError(
                f"{doc.meta.doc_id}: undated document in {context}; "
                "filter undated documents out or autodate them first"
            )
        if status is DatingStatus.AUTO_DATED and not include_autodated:
            continue
        out.append(doc)
    return out


def _doc_terms(doc: Document, use_lemmas: bool) -> Sequence[str]:
    if use_lemmas:
        if doc.lemmas is None:
            raise ValueError(f"{doc.meta.doc_id}: document is not lemmatized")
        return doc.lemmas
    return doc.surfaces()


@dataclass(frozen=True)
class LifespanRecord:
    lemma: str
    first_h: int
    last_h: int
    span_years: int
    doc_first: str
    doc_last: str


def compute_lifespans(
    corpus: Sequence[Document],
    use_lemmas: bool = True,
    include_autodated: bool = False,
    min_frequency: int = 0,
) -> list[LifespanRecord]:
    """First/last attestation per lemma, dated by author death year.

    Date ties break toward the lexicographically smallest doc_id.  Lemmas
    occurring fewer than ``min_frequency`` times in total are dropped when
    the filter is positive.
    """
    docs = _dated_docs(corpus, include_autodated, "lifespan computation")
    first: dict[str, tuple[int, str]] = {}
    last: dict[str, tuple[int, str]] = {}
    totals: dict[str, int] = {}
    for doc in docs:
        year = doc.meta.dod_hijri
        doc_id = doc.meta.doc_id
        assert year is not None
        for term in set(_doc_terms(doc, use_lemmas)):
            if term not in first or (year, doc_id) < first[term]:
                first[term] = (year, doc_id)
            if term not in last or (-year, doc_id) < last[term]:
                last[term] = (-year, doc_id)
        if min_frequency > 0:
            for term in _doc_terms(doc, use_lemmas):
                totals[term] = totals.get(term, 0) + 1
    records = []
    for lemma in sorted(first):
        if min_frequency > 0 and totals.get(lemma, 0) < min_frequency:
            continue
        first_h, doc_first = first[lemma]
        neg_last, doc_last = last[lemma]
        last_h = -neg_last
        records.append(
            LifespanRecord(
                lemma=lemma,
                first_h=first_h,
                last_h=last_h,
                span_years=last_h - first_h,
                doc_first=doc_first,
                doc_last=doc_last,
            )
        )
    return records


def lifespan_stats(
    records: Sequence[LifespanRecord], corpus_span_years: int
) -> dict[str, float]:
    """Mean, population SD, median, and mean as a fraction of the corpus span."""
    if not records:
        raise ValueError("no lifespan records to summarize")
    if corpus_span_years <= 0:
        raise ValueError(f"corpus_span_years must be positive, got {corpus_span_years}")
    spans = sorted(r.span_years for r in records)
    n = len(spans)
    mean = sum(spans) / n
    sd = math.sqrt(sum((s - mean) ** 2 for s in spans) / n)
    mid = n // 2
    median = float(spans[mid]) if n % 2 else (spans[mid - 1] + spans[mid]) / 2.0
    return {
        "mean": mean,
        "sd": sd,
        "median": median,
        "mean_fraction_of_span": mean / corpus_span_years,
    }


@dataclass(frozen=True)
class ConcordanceLine:
    doc_id: str
    dod_hijri: int
    position: int  # token index of the hit
    left: tuple[str, ...]
    hit: str  # surface form at the hit position
    right: tuple[str, ...]


def concordance(
    corpus: Sequence[Document],
    query: str,
    window: int = 5,
    use_lemmas: bool = True,
    include_autodated: bool = False,
) -> list[ConcordanceLine]:
    """Every occurrence of a lemma with its context, sorted by date.

    Lines sort by (dod_hijri, doc_id, position); context windows truncate at
    document boundaries.  An absent lemma yields an empty result.
    """
    docs = _dated_docs(corpus, include_autodated, "concordance")
    lines = []
    for doc in docs:
        terms = _doc_terms(doc, use_lemmas)
        surfaces = doc.surfaces()
        for i, term in enumerate(terms):
            if term != query:
                continue
            lines.append(
                ConcordanceLine(
                    doc_id=doc.meta.doc_id,
                    dod_hijri=doc.meta.dod_hijri,  # type: ignore[arg-type]
                    position=i,
                    left=tuple(surfaces[max(0, i - window):i]),
                    hit=surfaces[i],
                    right=tuple(surfaces[i + 1 : i + 1 + window]),
                )
            )
    lines.sort(key=lambda ln: (ln.dod_hijri, ln.doc_id, ln.position))
    return lines


@dataclass(frozen=True)
class PeriodCount:
    start_h: int
    end_h: int
    word_count: int
    text_count: int

    @property
    def label(self) -> str:
        return f"{self.start_h}-{self.end_h}"


def counts_per_period(
    corpus: Sequence[Document],
    bucket_years: int = 50,
    include_autodated: bool = False,
) -> list[PeriodCount]:
    """Word and text counts per fixed-width date bucket.

    Buckets are aligned so years 1..bucket_years form the first bucket; the
    emitted series covers the corpus date range contiguously, zeros included.
    """
    if bucket_years < 1:
        raise ValueError("bucket_years must be >= 1")
    docs = _dated_docs(corpus, include_autodated, "period counts")
    if not docs:
        return []
    years = [doc.meta.dod_hijri for doc in docs]
    lo_bucket = (min(years) - 1) // bucket_years
    hi_bucket = (max(years) - 1) // bucket_years
    words = [0] * (hi_bucket - lo_bucket + 1)
    texts = [0] * (hi_bucket - lo_bucket + 1)
    for doc in docs:
        b = (doc.meta.dod_hijri - 1) // bucket_years - lo_bucket
        words[b] += doc.meta.word_count
        texts[b] += 1
    return [
        PeriodCount(
            start_h=(lo_bucket + i) * bucket_years + 1,
            end_h=(lo_bucket + i + 1) * bucket_years,
            word_count=words[i],
            text_count=texts[i],
        )
        for i in range(len(words))
    ]


def lifespan_histogram(
    records: Sequence[LifespanRecord], bucket_years: int = 100
) -> list[tuple[int, int, int]]:
    """Bucketed lifespan distribution as (start, end, count), plot-ready."""
    if bucket_years < 1:
        raise ValueError("bucket_years must be >= 1")
    if not records:
        return []
    hi_bucket = max(r.span_years for r in records) // bucket_years
    counts = [0] * (hi_bucket + 1)
    for r in records:
        counts[r.span_years // bucket_years] += 1
    return [
        (i * bucket_years, (i + 1) * bucket_years - 1, c) for i, c in enumerate(counts)
    ]


# --- delimited writers -------------------------------------------------------


def write_lifespans_csv(records: Iterable[LifespanRecord], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lemma", "first_h", "last_h", "span_years", "doc_first", "doc_last"])
        for r in records:
            writer.writerow([r.lemma, r.first_h, r.last_h, r.span_years, r.doc_first, r.doc_last])


def write_lifespan_hist_csv(rows: Iterable[tuple[int, int, int]], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["span_start", "span_end", "lemma_count"])
        for start, end, count in rows:
            writer.writerow([start, end, count])


def write_concordance_csv(lines: Iterable[ConcordanceLine], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "dod_hijri", "position", "left", "hit", "right"])
        for ln in lines:
            writer.writerow(
                [ln.doc_id, ln.dod_hijri, ln.position, " ".join(ln.left), ln.hit, " ".join(ln.right)]
            )


def write_period_counts_csv(rows: Iterable[PeriodCount], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period_start", "period_end", "word_count", "text_count"])
        for row in rows:
            writer.writerow([row.start_h, row.end_h, row.word_count, row.text_count])
