"""Two-letter word hashes and skip-gram keys for approximate passage matching.

A word is represented by its two rarest letters, which makes the hash stable
under orthographic variation and affix changes.  A 5-token window yields four
skip-gram keys, each keeping the window-initial token's hash and omitting one
of the other four, so two windows still share a key when a single non-initial
word differs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

WINDOW = 5  # tokens per skip-gram window

# doc_id paired with its token surfaces; the working unit of this subpackage
TokenCorpus = Sequence[tuple[str, Sequence[str]]]

LetterFrequencyTable = Counter


def token_corpus(docs: Iterable, use_lemmas: bool = False) -> list[tuple[str, list[str]]]:
    """Adapt Documents to the (doc_id, token surfaces) pairs used here."""
    out = []
    for doc in docs:
        if use_lemmas:
            if doc.lemmas is None:
                raise ValueError(f"{doc.meta.doc_id}: document is not lemmatized")
            out.append((doc.meta.doc_id, list(doc.lemmas)))
        else:
            out.append((doc.meta.doc_id, doc.surfaces()))
    return out


def build_letter_frequencies(corpus: TokenCorpus) -> Counter:
    """Exact per-letter occurrence counts over all token surfaces."""
    table: Counter = Counter()
    for _, tokens in corpus:
        for word, count in Counter(tokens).items():
            for ch in word:
                table[ch] += count
    return table


def word_hash(word: str, table: LetterFrequencyTable) -> tuple[str, str]:
    """The word's two corpus-rarest letters, ordered by position in the word.

    Equal-frequency letters rank by first occurrence position, then code
    point.  A word with a single distinct letter hashes to it doubled.
    """
    if not word:
        raise ValueError("cannot hash an empty word")
    first_pos: dict[str, int] = {}
    for i, ch in enumerate(word):
        if ch not in first_pos:
            first_pos[ch] = i
    ranked = sorted(first_pos, key=lambda ch: (table[ch], first_pos[ch], ord(ch)))
    if len(ranked) == 1:
        return (ranked[0], ranked[0])
    a, b = ranked[0], ranked[1]
    return (a, b) if first_pos[a] < first_pos[b] else (b, a)


@dataclass(frozen=True)
class SkipGramKey:
    hashes: tuple[tuple[str, str], ...]  # 4 word hashes in window order
    omitted_slot: int  # 1..4


def skipgrams_at(
    tokens: Sequence[str],
    i: int,
    table: LetterFrequencyTable,
    mask: Sequence[bool] | None = None,
) -> list[SkipGramKey]:
    """The four skip-gram keys of the 5-token window starting at ``i``.

    Windows that run past the end of the document or overlap a masked
    (boilerplate) position produce no keys.
    """
    if i < 0 or i + WINDOW > len(tokens):
        return []
    if mask is not None and any(mask[i + j] for j in range(WINDOW)):
        return []
    hashes = [word_hash(tokens[i + j], table) for j in range(WINDOW)]
    keys = []
    for slot in range(1, WINDOW):
        kept = tuple(hashes[j] for j in range(WINDOW) if j != slot)
        keys.append(SkipGramKey(hashes=kept, omitted_slot=slot))
    return keys
