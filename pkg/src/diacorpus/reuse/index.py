"""Skip-gram posting index over a masked corpus.

Postings are stored as three parallel arrays (key, document, position) sorted
by key; equal-key runs are the posting lists.  Keys whose posting list
exceeds the cap are dropped and counted: they are residual boilerplate the
masking pass missed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .boilerplate import BoilerplateMask
from .engine import HashedCorpus, hash_corpus, window_start_validity
from .hashing import WINDOW, TokenCorpus

# Packing 4 pair ids plus a 2-bit slot into an int64 requires ids < 2**15.
_MAX_PACKED_PAIRS = 1 << 15

DEFAULT_POSTING_CAP = 1000


@dataclass
class SkipGramIndex:
    doc_ids: list[str]
    keys: np.ndarray  # int64, sorted ascending
    docs: np.ndarray  # int32 document index
    positions: np.ndarray  # int32 window start
    dropped_keys: int
    dropped_postings: int
    posting_cap: int
    pair_count: int

    @property
    def total_postings(self) -> int:
        return int(len(self.keys))

    def run_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Start offsets and lengths of equal-key runs."""
        n = len(self.keys)
        if n == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        starts = np.flatnonzero(np.r_[True, self.keys[1:] != self.keys[:-1]])
        lengths = np.diff(np.r_[starts, n])
        return starts, lengths

    def save(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(
            directory / "index.npz",
            keys=self.keys,
            docs=self.docs,
            positions=self.positions,
        )
        meta = {
            "doc_ids": self.doc_ids,
            "dropped_keys": self.dropped_keys,
            "dropped_postings": self.dropped_postings,
            "posting_cap": self.posting_cap,
            "pair_count": self.pair_count,
        }
        (directory / "index.json").write_text(
            json.dumps(meta, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, directory: Path | str) -> "SkipGramIndex":
        directory = Path(directory)
        npz_path = directory / "index.npz"
        meta_path = directory / "index.json"
        for p in (npz_path, meta_path):
            if not p.exists():
                raise FileNotFoundError(f"index file not found: {p}")
        arrays = np.load(npz_path)
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return cls(
            doc_ids=list(meta["doc_ids"]),
            keys=arrays["keys"],
            docs=arrays["docs"],
            positions=arrays["positions"],
            dropped_keys=int(meta["dropped_keys"]),
            dropped_postings=int(meta["dropped_postings"]),
            posting_cap=int(meta["posting_cap"]),
            pair_count=int(meta["pair_count"]),
        )


def _doc_keys_packed(stream: np.ndarray, valid: np.ndarray, pair_count: int
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Packed skip-gram keys and start positions for one document."""
    starts = np.flatnonzero(valid).astype(np.int64)
    if len(starts) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    base = np.int64(pair_count)
    window_cols = [stream[starts + j] for j in range(WINDOW)]
    all_keys = []
    all_pos = []
    for slot in range(1, WINDOW):
        kept = [window_cols[j] for j in range(WINDOW) if j != slot]
        packed = np.zeros(len(starts), dtype=np.int64)
        for col in kept:
            packed = packed * base + col
        all_keys.append(packed * 4 + (slot - 1))
        all_pos.append(starts)
    return np.concatenate(all_keys), np.concatenate(all_pos)


def _remap_to_dense(hc: HashedCorpus, masks: Mapping[str, BoilerplateMask] | None
                    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Tuple-keyed fallback for corpora whose pair alphabet exceeds packing."""
    key_ids: dict[tuple, int] = {}
    keys_per_doc, pos_per_doc = [], []
    for i, stream in enumerate(hc.streams):
        mask = masks[hc.doc_ids[i]].marked if masks is not None else None
        valid = window_start_validity(len(stream), WINDOW, mask)
        starts = np.flatnonzero(valid)
        doc_keys, doc_pos = [], []
        for s in starts:
            window = tuple(int(x) for x in stream[s : s + WINDOW])
            for slot in range(1, WINDOW):
                kept = tuple(window[j] for j in range(WINDOW) if j != slot) + (slot,)
                kid = key_ids.setdefault(kept, len(key_ids))
                doc_keys.append(kid)
                doc_pos.append(int(s))
        keys_per_doc.append(np.asarray(doc_keys, dtype=np.int64))
        pos_per_doc.append(np.asarray(doc_pos, dtype=np.int64))
    return keys_per_doc, pos_per_doc


def build_index(
    corpus: TokenCorpus | HashedCorpus,
    masks: Mapping[str, BoilerplateMask] | None = None,
    posting_cap: int = DEFAULT_POSTING_CAP,
    workers: int = 1,
) -> SkipGramIndex:
    """Build the skip-gram posting index.

    Window positions overlapping masked tokens emit no keys.  Keys whose
    posting list exceeds ``posting_cap`` are dropped and counted.
    """
    if posting_cap < 2:
        raise ValueError("posting_cap must be >= 2")
    hc = corpus if isinstance(corpus, HashedCorpus) else hash_corpus(corpus, workers=workers)
    if masks is not None:
        for doc_id, stream in zip(hc.doc_ids, hc.streams):
            if doc_id not in masks:
                raise ValueError(f"no boilerplate mask for document {doc_id}")
            if len(masks[doc_id].marked) != len(stream):
                raise ValueError(
                    f"{doc_id}: mask length {len(masks[doc_id].marked)} != "
                    f"token count {len(stream)}"
                )

    if hc.pair_count < _MAX_PACKED_PAIRS:
        keys_per_doc, pos_per_doc = [], []
        for i, stream in enumerate(hc.streams):
            mask = masks[hc.doc_ids[i]].marked if masks is not None else None
            valid = window_start_validity(len(stream), WINDOW, mask)
            doc_keys, doc_pos = _doc_keys_packed(stream, valid, hc.pair_count)
            keys_per_doc.append(doc_keys)
            pos_per_doc.append(doc_pos)
    else:
        keys_per_doc, pos_per_doc = _remap_to_dense(hc, masks)

    doc_col = [
        np.full(len(keys_per_doc[i]), i, dtype=np.int32) for i in range(len(hc.streams))
    ]
    keys = np.concatenate(keys_per_doc) if keys_per_doc else np.zeros(0, dtype=np.int64)
    docs = np.concatenate(doc_col) if doc_col else np.zeros(0, dtype=np.int32)
    positions = (
        np.concatenate(pos_per_doc).astype(np.int32)
        if pos_per_doc else np.zeros(0, dtype=np.int32)
    )

    order = np.lexsort((positions, docs, keys))
    keys, docs, positions = keys[order], docs[order], positions[order]

    dropped_keys = 0
    dropped_postings = 0
    if len(keys):
        starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
        lengths = np.diff(np.r_[starts, len(keys)])
        over = lengths > posting_cap
        dropped_keys = int(over.sum())
        dropped_postings = int(lengths[over].sum())
        if dropped_keys:
            keep = np.repeat(~over, lengths)
            keys, docs, positions = keys[keep], docs[keep], positions[keep]

    return SkipGramIndex(
        doc_ids=list(hc.doc_ids),
        keys=keys,
        docs=docs,
        positions=positions,
        dropped_keys=dropped_keys,
        dropped_postings=dropped_postings,
        posting_cap=posting_cap,
        pair_count=hc.pair_count,
    )
