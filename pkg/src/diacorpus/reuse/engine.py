"""Interned token streams shared by the boilerplate and index passes.

Every distinct surface form is hashed once; token streams become arrays of
small hash-pair ids so the corpus-scale passes run on numpy arrays instead
of per-token Python objects.  Corpus shards can be interned by independent
worker processes; the id assignment is fixed upfront so shard order never
affects the result.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .hashing import TokenCorpus, build_letter_frequencies, word_hash

_worker_pair_of_word: dict[str, int] = {}


def _init_worker(pair_of_word: dict[str, int]) -> None:
    global _worker_pair_of_word
    _worker_pair_of_word = pair_of_word


def _intern_chunk(chunk: list[list[str]]) -> list[np.ndarray]:
    table = _worker_pair_of_word
    return [
        np.fromiter((table[w] for w in tokens), dtype=np.int64, count=len(tokens))
        for tokens in chunk
    ]


@dataclass
class HashedCorpus:
    doc_ids: list[str]
    streams: list[np.ndarray]  # per document, hash-pair id per token
    pairs: list[tuple[str, str]]  # id -> letter pair
    pair_of_word: dict[str, int]
    letter_table: Counter

    @property
    def pair_count(self) -> int:
        return len(self.pairs)

    @property
    def total_tokens(self) -> int:
        return sum(len(s) for s in self.streams)

    def doc_index(self) -> dict[str, int]:
        return {doc_id: i for i, doc_id in enumerate(self.doc_ids)}


def hash_corpus(
    corpus: TokenCorpus,
    table: Counter | None = None,
    workers: int = 1,
) -> HashedCorpus:
    """Intern a token corpus into hash-pair id streams.

    ``table`` defaults to exact letter frequencies over the corpus itself.
    Ids are assigned from the sorted vocabulary, so the mapping is a pure
    function of the corpus content.
    """
    docs = [(doc_id, list(tokens)) for doc_id, tokens in corpus]
    seen = set()
    for doc_id, _ in docs:
        if doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc_id!r} in corpus")
        seen.add(doc_id)
    if table is None:
        table = build_letter_frequencies(docs)
    vocab: set[str] = set()
    for _, tokens in docs:
        vocab.update(tokens)
    pairs: list[tuple[str, str]] = []
    pair_ids: dict[tuple[str, str], int] = {}
    pair_of_word: dict[str, int] = {}
    for word in sorted(vocab):
        pair = word_hash(word, table)
        pid = pair_ids.get(pair)
        if pid is None:
            pid = len(pairs)
            pair_ids[pair] = pid
            pairs.append(pair)
        pair_of_word[word] = pid

    token_lists = [tokens for _, tokens in docs]
    if workers > 1 and len(docs) > 1:
        chunk_size = max(1, (len(docs) + workers - 1) // workers)
        chunks = [token_lists[i : i + chunk_size] for i in range(0, len(docs), chunk_size)]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(pair_of_word,)
        ) as pool:
            streams = [s for part in pool.map(_intern_chunk, chunks) for s in part]
    else:
        _init_worker(pair_of_word)
        streams = _intern_chunk(token_lists)
    return HashedCorpus(
        doc_ids=[doc_id for doc_id, _ in docs],
        streams=streams,
        pairs=pairs,
        pair_of_word=pair_of_word,
        letter_table=table,
    )


def window_start_validity(
    stream_len: int, window: int, mask: np.ndarray | None
) -> np.ndarray:
    """Boolean array over window start positions; masked windows are invalid."""
    n_starts = stream_len - window + 1
    if n_starts <= 0:
        return np.zeros(0, dtype=bool)
    if mask is None:
        return np.ones(n_starts, dtype=bool)
    covered = np.cumsum(np.concatenate(([0], mask.astype(np.int64))))
    return (covered[window:] - covered[:-window]) == 0
