"""Mark frequently-recurring passages so they stay out of the reuse index.

Formulaic passages (prayers, scriptural verses) recur thousands of times and
would blow up posting lists.  Every token run whose hash sequence of
``passage_len`` recurs at least ``recurrence_threshold`` times corpus-wide is
masked; the text itself is untouched so downstream analytics still see it.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import HashedCorpus, hash_corpus
from .hashing import TokenCorpus

# Base-pack at most this many ids per int64 column (ids < 2**21 each).
_IDS_PER_COLUMN = 3
_MAX_PACKED_ID = 1 << 21


@dataclass(frozen=True)
class BoilerplateMask:
    doc_id: str
    marked: np.ndarray  # bool, one flag per token

    def ranges(self) -> list[tuple[int, int]]:
        """Marked regions as [start, end) pairs."""
        out = []
        flat = np.flatnonzero(np.diff(np.r_[0, self.marked.astype(np.int8), 0]))
        for start, end in zip(flat[::2], flat[1::2]):
            out.append((int(start), int(end)))
        return out

    @classmethod
    def from_ranges(cls, doc_id: str, length: int, ranges: Sequence[Sequence[int]]) -> "BoilerplateMask":
        marked = np.zeros(length, dtype=bool)
        for start, end in ranges:
            marked[start:end] = True
        return cls(doc_id=doc_id, marked=marked)


@dataclass(frozen=True)
class BoilerplateReport:
    masks: dict[str, BoilerplateMask]
    marked_tokens: int
    total_tokens: int
    passage_len: int
    recurrence_threshold: int

    @property
    def marked_fraction(self) -> float:
        return self.marked_tokens / self.total_tokens if self.total_tokens else 0.0


def _pack_columns(streams: list[np.ndarray], starts_per_doc: list[np.ndarray],
                  passage_len: int, pair_count: int) -> list[np.ndarray]:
    n_columns = (passage_len + _IDS_PER_COLUMN - 1) // _IDS_PER_COLUMN
    columns = []
    base = np.int64(pair_count)
    for col in range(n_columns):
        lo = col * _IDS_PER_COLUMN
        hi = min(lo + _IDS_PER_COLUMN, passage_len)
        parts = []
        for stream, starts in zip(streams, starts_per_doc):
            packed = np.zeros(len(starts), dtype=np.int64)
            for j in range(lo, hi):
                packed = packed * base + stream[starts + j]
            parts.append(packed)
        columns.append(np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64))
    return columns


def mark_boilerplate(
    corpus: TokenCorpus | HashedCorpus,
    passage_len: int = 6,
    recurrence_threshold: int = 40,
    workers: int = 1,
) -> BoilerplateReport:
    """Mask every maximal token run whose hash sequence recurs enough.

    A position qualifies when the hash sequence of the ``passage_len`` tokens
    starting there occurs at least ``recurrence_threshold`` times across the
    whole corpus; all tokens of qualifying windows are marked.
    """
    if passage_len < 1:
        raise ValueError("passage_len must be >= 1")
    if recurrence_threshold < 2:
        raise ValueError("recurrence_threshold must be >= 2")
    hc = corpus if isinstance(corpus, HashedCorpus) else hash_corpus(corpus, workers=workers)

    starts_per_doc = []
    for stream in hc.streams:
        n_starts = len(stream) - passage_len + 1
        starts_per_doc.append(np.arange(max(0, n_starts), dtype=np.int64))

    if hc.pair_count < _MAX_PACKED_ID:
        columns = _pack_columns(hc.streams, starts_per_doc, passage_len, hc.pair_count)
        qualifying = _qualifying_packed(columns, recurrence_threshold)
    else:  # absurdly diverse alphabet: fall back to exact tuple counting
        qualifying = _qualifying_tuples(hc.streams, starts_per_doc, passage_len,
                                        recurrence_threshold)

    # Translate the flat qualifying-start indices back into per-document marks.
    doc_of_start = np.concatenate(
        [np.full(len(starts), i, dtype=np.int64) for i, starts in enumerate(starts_per_doc)]
    ) if starts_per_doc else np.zeros(0, dtype=np.int64)
    start_in_doc = np.concatenate(starts_per_doc) if starts_per_doc else np.zeros(0, dtype=np.int64)

    masks: dict[str, BoilerplateMask] = {}
    marked_total = 0
    for i, doc_id in enumerate(hc.doc_ids):
        n = len(hc.streams[i])
        q = start_in_doc[qualifying[doc_of_start[qualifying] == i]]
        if len(q) == 0:
            marked = np.zeros(n, dtype=bool)
        else:
            delta = np.bincount(q, minlength=n + passage_len).astype(np.int64)
            delta -= np.bincount(q + passage_len, minlength=n + passage_len)
            marked = np.cumsum(delta)[:n] > 0
        masks[doc_id] = BoilerplateMask(doc_id=doc_id, marked=marked)
        marked_total += int(marked.sum())
    return BoilerplateReport(
        masks=masks,
        marked_tokens=marked_total,
        total_tokens=hc.total_tokens,
        passage_len=passage_len,
        recurrence_threshold=recurrence_threshold,
    )


def _qualifying_packed(columns: list[np.ndarray], threshold: int) -> np.ndarray:
    """Flat indices of window starts whose packed key recurs >= threshold."""
    n = len(columns[0])
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort(tuple(reversed(columns)))
    sorted_cols = [c[order] for c in columns]
    change = np.zeros(n, dtype=bool)
    change[0] = True
    for c in sorted_cols:
        change[1:] |= c[1:] != c[:-1]
    run_starts = np.flatnonzero(change)
    run_lengths = np.diff(np.r_[run_starts, n])
    hot = run_lengths >= threshold
    keep = np.repeat(hot, run_lengths)
    return order[keep]


def _qualifying_tuples(streams, starts_per_doc, passage_len, threshold) -> np.ndarray:
    counts: Counter = Counter()
    for stream, starts in zip(streams, starts_per_doc):
        for s in starts:
            counts[tuple(stream[s : s + passage_len])] += 1
    qualifying = []
    flat = 0
    for stream, starts in zip(streams, starts_per_doc):
        for s in starts:
            if counts[tuple(stream[s : s + passage_len])] >= threshold:
                qualifying.append(flat)
            flat += 1
    return np.asarray(qualifying, dtype=np.int64)


def write_boilerplate_jsonl(report: BoilerplateReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for doc_id, mask in report.masks.items():
            row = {
                "doc_id": doc_id,
                "token_count": int(len(mask.marked)),
                "ranges": [[s, e] for s, e in mask.ranges()],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_boilerplate_jsonl(path: Path | str) -> dict[str, BoilerplateMask]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"boilerplate file not found: {path}")
    masks: dict[str, BoilerplateMask] = {}
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            masks[row["doc_id"]] = BoilerplateMask.from_ranges(
                row["doc_id"], row["token_count"], row["ranges"]
            )
    return masks
