"""Corpus-wide detection of approximately-matching parallel passages."""

from .boilerplate import (
    BoilerplateMask,
    BoilerplateReport,
    mark_boilerplate,
    read_boilerplate_jsonl,
    write_boilerplate_jsonl,
)
from .engine import HashedCorpus, hash_corpus
from .hashing import (
    WINDOW,
    LetterFrequencyTable,
    SkipGramKey,
    TokenCorpus,
    build_letter_frequencies,
    skipgrams_at,
    token_corpus,
    word_hash,
)
from .index import DEFAULT_POSTING_CAP, SkipGramIndex, build_index
from .matching import (
    DEFAULT_MAX_GAP,
    DEFAULT_MIN_MATCH_LEN,
    PassageMatch,
    find_matches,
    match_summary,
    matches_for_document,
    read_matches_jsonl,
    write_matches_jsonl,
)

__all__ = [
    "DEFAULT_MAX_GAP",
    "DEFAULT_MIN_MATCH_LEN",
    "DEFAULT_POSTING_CAP",
    "WINDOW",
    "BoilerplateMask",
    "BoilerplateReport",
    "HashedCorpus",
    "LetterFrequencyTable",
    "PassageMatch",
    "SkipGramIndex",
    "SkipGramKey",
    "TokenCorpus",
    "build_index",
    "build_letter_frequencies",
    "find_matches",
    "hash_corpus",
    "mark_boilerplate",
    "match_summary",
    "matches_for_document",
    "read_boilerplate_jsonl",
    "read_matches_jsonl",
    "skipgrams_at",
    "token_corpus",
    "word_hash",
    "write_boilerplate_jsonl",
    "write_matches_jsonl",
]
