"""Chain shared skip-gram seeds into passage matches.

A seed is a skip-gram key shared by two window positions in distinct
documents (or non-overlapping positions in one document).  Seeds for the
same document pair chain when consecutive seeds advance by at most
``max_gap`` tokens in both documents, which tolerates interpolated, omitted,
and substituted words; chains spanning at least ``min_match_len`` tokens on
both sides become matches.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .hashing import WINDOW
from .index import SkipGramIndex

DEFAULT_MIN_MATCH_LEN = 20
DEFAULT_MAX_GAP = 10

# Below this many document pairs, process-pool overhead outweighs the work.
_PARALLEL_GROUP_THRESHOLD = 64


@dataclass(frozen=True)
class PassageMatch:
    """An aligned pair of token spans; spans are [start, end) token ranges."""

    doc_a: str
    doc_b: str
    start_a: int
    end_a: int
    start_b: int
    end_b: int
    length: int  # min of the two span lengths
    seed_count: int

    def swapped(self) -> "PassageMatch":
        return replace(
            self,
            doc_a=self.doc_b, doc_b=self.doc_a,
            start_a=self.start_b, end_a=self.end_b,
            start_b=self.start_a, end_b=self.end_a,
        )


def _seed_pairs(index: SkipGramIndex) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """All seed pairs (doc_a, pos_a, doc_b, pos_b) from equal-key runs."""
    starts, lengths = index.run_bounds()
    da_parts, db_parts, pa_parts, pb_parts = [], [], [], []
    for start, length in zip(starts, lengths):
        if length < 2:
            continue
        run_docs = index.docs[start : start + length]
        run_pos = index.positions[start : start + length]
        ii, jj = np.triu_indices(int(length), k=1)
        da, db = run_docs[ii], run_docs[jj]
        pa, pb = run_pos[ii], run_pos[jj]
        same = da == db
        keep = ~same | (np.abs(pb.astype(np.int64) - pa) >= WINDOW)
        da_parts.append(da[keep])
        db_parts.append(db[keep])
        pa_parts.append(pa[keep])
        pb_parts.append(pb[keep])
    if not da_parts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    return (
        np.concatenate(da_parts).astype(np.int64),
        np.concatenate(pa_parts).astype(np.int64),
        np.concatenate(db_parts).astype(np.int64),
        np.concatenate(pb_parts).astype(np.int64),
    )


def _chain_seeds(pa: np.ndarray, pb: np.ndarray, max_gap: int) -> list[list[int]]:
    """Greedy diagonal chaining of one document pair's seeds.

    Seeds must arrive sorted by (pa, pb).  Each chain is
    [start_a, start_b, last_a, last_b, seed_count].
    """
    chains: list[list[int]] = []
    active: list[list[int]] = []
    prev_x = prev_y = -1
    for x, y in zip(pa.tolist(), pb.tolist()):
        if x == prev_x and y == prev_y:
            continue
        prev_x, prev_y = x, y
        survivors = []
        best = None
        best_dist = None
        for chain in active:
            if chain[2] < x - max_gap:
                chains.append(chain)
                continue
            survivors.append(chain)
            dy = y - chain[3]
            if 0 <= dy <= max_gap:
                dist = abs((x - y) - (chain[2] - chain[3]))
                if best is None or dist < best_dist:
                    best, best_dist = chain, dist
        active = survivors
        if best is not None:
            best[2], best[3] = x, y
            best[4] += 1
        else:
            active.append([x, y, x, y, 1])
    chains.extend(active)
    return chains


def _merge_group(raw: list[tuple[int, int, int, int, int]]) -> list[tuple[int, int, int, int, int]]:
    """Merge matches of one document pair that overlap in both spans."""
    merged: list[list[int]] = []
    for cand in sorted(raw):
        target = None
        for kept in merged:
            if (cand[0] < kept[1] and cand[1] > kept[0]
                    and cand[2] < kept[3] and cand[3] > kept[2]):
                target = kept
                break
        if target is None:
            merged.append(list(cand))
        else:
            target[0] = min(target[0], cand[0])
            target[1] = max(target[1], cand[1])
            target[2] = min(target[2], cand[2])
            target[3] = max(target[3], cand[3])
            target[4] += cand[4]
    return [tuple(m) for m in sorted(merged)]


def _match_group(args) -> list[tuple[int, int, int, int, int, int, int]]:
    da, db, pa, pb, min_match_len, max_gap = args
    raw = []
    for chain in _chain_seeds(pa, pb, max_gap):
        span_a = (chain[0], chain[2] + WINDOW)
        span_b = (chain[1], chain[3] + WINDOW)
        if min(span_a[1] - span_a[0], span_b[1] - span_b[0]) < min_match_len:
            continue
        if da == db and span_a[1] > span_b[0] and span_b[1] > span_a[0]:
            continue  # degenerate self-overlap
        raw.append((span_a[0], span_a[1], span_b[0], span_b[1], chain[4]))
    out = []
    for sa, ea, sb, eb, seeds in _merge_group(raw):
        if min(ea - sa, eb - sb) < min_match_len:
            continue
        out.append((da, db, sa, ea, sb, eb, seeds))
    return out


def find_matches(
    index: SkipGramIndex,
    min_match_len: int = DEFAULT_MIN_MATCH_LEN,
    max_gap: int = DEFAULT_MAX_GAP,
    workers: int = 1,
) -> list[PassageMatch]:
    """All passage matches implied by the index, deterministically sorted.

    One orientation per pair is stored (document order as indexed, spans
    ordered within a document); ``matches_for_document`` exposes both.
    Output is sorted by (doc_a, doc_b, start_a) and identical inputs yield
    byte-identical output.
    """
    da, pa, db, pb = _seed_pairs(index)
    if len(da) == 0:
        return []
    order = np.lexsort((pb, pa, db, da))
    da, pa, db, pb = da[order], pa[order], db[order], pb[order]
    boundary = np.flatnonzero(np.r_[True, (da[1:] != da[:-1]) | (db[1:] != db[:-1])])
    bounds = np.r_[boundary, len(da)]
    jobs = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        jobs.append((int(da[lo]), int(db[lo]), pa[lo:hi], pb[lo:hi], min_match_len, max_gap))
    if workers > 1 and len(jobs) >= _PARALLEL_GROUP_THRESHOLD:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            group_results = list(pool.map(_match_group, jobs, chunksize=64))
    else:
        group_results = [_match_group(job) for job in jobs]
    matches = []
    for rows in group_results:
        for d_a, d_b, sa, ea, sb, eb, seeds in rows:
            matches.append(
                PassageMatch(
                    doc_a=index.doc_ids[d_a],
                    doc_b=index.doc_ids[d_b],
                    start_a=sa, end_a=ea,
                    start_b=sb, end_b=eb,
                    length=min(ea - sa, eb - sb),
                    seed_count=seeds,
                )
            )
    return matches


def matches_for_document(matches: Iterable[PassageMatch], doc_id: str) -> list[PassageMatch]:
    """Matches touching a document, oriented so it appears as doc_a.

    A self-match is reported in both orientations, making the symmetric view
    explicit even though storage keeps one orientation.
    """
    out = []
    for m in matches:
        if m.doc_a == doc_id:
            out.append(m)
            if m.doc_b == doc_id:
                out.append(m.swapped())
        elif m.doc_b == doc_id:
            out.append(m.swapped())
    return out


def match_summary(
    matches: Sequence[PassageMatch],
    index: SkipGramIndex,
    masked_fraction: float | None = None,
) -> dict:
    lengths = [m.length for m in matches]
    return {
        "match_count": len(matches),
        "mean_match_length": (sum(lengths) / len(lengths)) if lengths else 0.0,
        "total_postings": index.total_postings,
        "dropped_keys": index.dropped_keys,
        "dropped_postings": index.dropped_postings,
        "masked_fraction": masked_fraction,
    }


def write_matches_jsonl(matches: Iterable[PassageMatch], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for m in matches:
            row = {
                "doc_a": m.doc_a, "doc_b": m.doc_b,
                "start_a": m.start_a, "end_a": m.end_a,
                "start_b": m.start_b, "end_b": m.end_b,
                "length": m.length, "seed_count": m.seed_count,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_matches_jsonl(path: Path | str) -> list[PassageMatch]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"matches file not found: {path}")
    matches = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            matches.append(
                PassageMatch(
                    doc_a=row["doc_a"], doc_b=row["doc_b"],
                    start_a=row["start_a"], end_a=row["end_a"],
                    start_b=row["start_b"], end_b=row["end_b"],
                    length=row["length"], seed_count=row["seed_count"],
                )
            )
    return matches
