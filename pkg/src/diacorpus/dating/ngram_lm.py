"""Backoff n-gram language model with interpolated modified Kneser-Ney smoothing.

Training follows the count-of-count discount estimation of Chen & Goodman:
lower orders use continuation counts (except start-of-sentence grams, which
keep raw counts), each order gets three discounts D1/D2/D3+, and the unigram
distribution is interpolated with the uniform distribution so every vocabulary
word has positive probability.  A degenerate maximum-likelihood mode (order 1,
no padding, no unknown-word class) is kept as an independently checkable
baseline.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

KNESER_NEY = "kneser_ney"
MLE = "mle"

logger = logging.getLogger(__name__)

Ngram = tuple  # tuple of word ids


@dataclass
class NgramLanguageModel:
    """A trained model: per-order log10 probability tables plus backoff weights.

    Scoring uses the standard backoff recursion: the longest matching n-gram's
    stored probability, otherwise the context's backoff weight times the
    lower-order estimate.
    """

    order: int
    smoothing: str
    words: list[str]
    word_ids: dict[str, int]
    logprobs: list[dict[Ngram, float]]  # index k-1 holds the k-gram table
    backoffs: dict[Ngram, float]
    bos_id: int | None
    eos_id: int | None
    unk_id: int | None

    @property
    def vocab(self) -> set[str]:
        """Word types the model predicts, including the unknown-word class."""
        excluded = {self.bos_id, self.eos_id}
        return {self.words[ids[0]] for ids in self.logprobs[0] if ids[0] not in excluded}

    def event_ids(self) -> list[int]:
        """Ids of every scoreable event (vocabulary plus end-of-sentence)."""
        return [ids[0] for ids in self.logprobs[0] if ids[0] != self.bos_id]

    def _id_of(self, word: str) -> int | None:
        wid = self.word_ids.get(word)
        if wid is None:
            return self.unk_id
        return wid

    def _logprob_ids(self, context: Ngram, wid: int) -> float:
        acc = 0.0
        ctx = context[-(self.order - 1):] if self.order > 1 else ()
        while True:
            hit = self.logprobs[len(ctx)].get(ctx + (wid,))
            if hit is not None:
                return acc + hit
            if not ctx:
                if self.smoothing == MLE:
                    return -math.inf
                return acc - 99.0  # unigram miss: only possible on foreign vocab
            acc += self.backoffs.get(ctx, 0.0)
            ctx = ctx[1:]

    def logprob(self, word: str, context: Sequence[str] = ()) -> float:
        """log10 P(word | context); out-of-vocabulary words score as UNK."""
        wid = self._id_of(word)
        if wid is None:
            return -math.inf
        ctx = tuple(self._id_of(w) for w in context)
        if any(c is None for c in ctx):
            return -math.inf
        return self._logprob_ids(ctx, wid)

    def score_sentences(self, sentences: Iterable[Sequence[str]]) -> tuple[float, int]:
        """Total log10 probability and event count over the sentences.

        With smoothing, each sentence is padded with a start symbol and
        scored through its end symbol, so the event count is the token count
        plus one end-of-sentence event per sentence.  The result is additive:
        scoring chunks of the same sentence stream and summing is identical
        to scoring it whole.
        """
        total = 0.0
        n_events = 0
        for sentence in sentences:
            if self.smoothing == MLE:
                for word in sentence:
                    total += self.logprob(word)
                    n_events += 1
                continue
            full = [self.bos_id] + [self._id_of(w) for w in sentence] + [self.eos_id]
            for pos in range(1, len(full)):
                ctx = tuple(full[max(0, pos - (self.order - 1)):pos])
                total += self._logprob_ids(ctx, full[pos])
                n_events += 1
        return total, n_events

    def perplexity(self, sentences: Iterable[Sequence[str]]) -> float:
        total, n_events = self.score_sentences(sentences)
        if n_events == 0:
            raise ValueError("cannot compute perplexity of an empty token sequence")
        return 10.0 ** (-total / n_events)

    def conditional_sum(self, context: Sequence[str]) -> float:
        """Sum of P(w | context) over all scoreable events; should be 1."""
        ctx = tuple(self._id_of(w) for w in context)
        return sum(10.0 ** self._logprob_ids(ctx, wid) for wid in self.event_ids())


def _sentences_as_lists(sentences: Iterable[Sequence[str]]) -> list[list[str]]:
    out = []
    for sentence in sentences:
        if isinstance(sentence, str):
            raise TypeError("expected an iterable of token sequences, got a string")
        out.append(list(sentence))
    return out


def _estimate_discounts(count_values: Iterable[int]) -> tuple[float, float, float]:
    """Modified Kneser-Ney discounts D1, D2, D3+ from counts of counts.

    Falls back to a fixed 0.75 for all three when the count-of-count
    statistics are degenerate (missing low counts or out-of-range estimates).
    """
    cc = Counter()
    for value in count_values:
        if 1 <= value <= 4:
            cc[value] += 1
    n1, n2, n3, n4 = cc[1], cc[2], cc[3], cc[4]
    if min(n1, n2, n3, n4) == 0:
        return 0.75, 0.75, 0.75
    y = n1 / (n1 + 2.0 * n2)
    d1 = 1.0 - 2.0 * y * n2 / n1
    d2 = 2.0 - 3.0 * y * n3 / n2
    d3 = 3.0 - 4.0 * y * n4 / n3
    if not (0.0 < d1 <= 1.0 and 0.0 < d2 <= 2.0 and 0.0 < d3 <= 3.0):
        return 0.75, 0.75, 0.75
    return d1, d2, d3


def _discount_for(count: int, discounts: tuple[float, float, float]) -> float:
    if count >= 3:
        return discounts[2]
    if count == 2:
        return discounts[1]
    return discounts[0]


def train_lm(
    sentences: Iterable[Sequence[str]],
    order: int = 5,
    smoothing: str = KNESER_NEY,
    min_count: int = 2,
) -> NgramLanguageModel:
    """Train an n-gram model on tokenized sentences.

    Words occurring fewer than ``min_count`` times are mapped to the
    unknown-word class before counting.  If the training text has fewer
    tokens than the requested order, the order falls back to the highest
    estimable one with a warning.
    """
    sents = _sentences_as_lists(sentences)
    total_tokens = sum(len(s) for s in sents)
    if total_tokens == 0:
        raise ValueError("cannot train a language model on empty text")
    if smoothing == MLE:
        if order != 1:
            raise ValueError("MLE mode supports order 1 only")
        return _train_mle(sents)
    if smoothing != KNESER_NEY:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    if total_tokens < order:
        fallback = max(1, total_tokens)
        logger.warning(
            "training text has %d tokens < order %d; falling back to order %d",
            total_tokens, order, fallback,
        )
        order = fallback

    text_freq = Counter(w for s in sents for w in s)
    if min_count > 1:
        sents = [[w if text_freq[w] >= min_count else UNK for w in s] for s in sents]

    words: list[str] = [BOS, EOS, UNK]
    word_ids: dict[str, int] = {BOS: 0, EOS: 1, UNK: 2}
    for s in sents:
        for w in s:
            if w not in word_ids:
                word_ids[w] = len(words)
                words.append(w)
    bos_id, eos_id, unk_id = 0, 1, 2

    # Raw k-gram counts for k = 1..order over singly start-padded sentences;
    # position 0 (the start symbol itself) is never a predicted event.
    raw: list[Counter] = [Counter() for _ in range(order + 1)]
    for s in sents:
        seq = [bos_id] + [word_ids[w] for w in s] + [eos_id]
        for i in range(1, len(seq)):
            for k in range(1, order + 1):
                if i - k + 1 >= 0:
                    raw[k][tuple(seq[i - k + 1 : i + 1])] += 1

    # Adjusted counts: raw at the top order and for start-anchored grams,
    # continuation counts (distinct left extensions) everywhere else.
    adjusted: list[dict[Ngram, int]] = [dict() for _ in range(order + 1)]
    adjusted[order] = dict(raw[order])
    for k in range(order - 1, 0, -1):
        cont: Counter = Counter()
        for key in raw[k + 1]:
            cont[key[1:]] += 1
        table = {}
        for key, count in raw[k].items():
            if key[0] == bos_id:
                table[key] = count
            else:
                table[key] = cont.get(key, 0)
        adjusted[k] = table

    event_ids = sorted(
        {key[0] for key in adjusted[1] if key[0] != bos_id} | {eos_id, unk_id}
    )
    vocab_size = len(event_ids)

    # Unigram level: discounted continuation counts interpolated uniformly.
    probs: list[dict[Ngram, float]] = [dict() for _ in range(order)]
    uni_counts = {wid: adjusted[1].get((wid,), 0) for wid in event_ids}
    discounts1 = _estimate_discounts(uni_counts.values())
    total_uni = sum(uni_counts.values())
    reserved = sum(
        _discount_for(c, discounts1) for c in uni_counts.values() if c > 0
    )
    gamma1 = reserved / total_uni
    for wid in event_ids:
        count = uni_counts[wid]
        disc = max(count - _discount_for(count, discounts1), 0.0) if count > 0 else 0.0
        probs[0][(wid,)] = disc / total_uni + gamma1 / vocab_size

    backoff_weights: dict[Ngram, float] = {}
    for k in range(2, order + 1):
        discounts = _estimate_discounts(adjusted[k].values())
        by_context: dict[Ngram, list[tuple[int, int]]] = {}
        for key, count in adjusted[k].items():
            if count > 0:
                by_context.setdefault(key[:-1], []).append((key[-1], count))
        for context, entries in by_context.items():
            total = sum(c for _, c in entries)
            reserved = sum(_discount_for(c, discounts) for _, c in entries)
            gamma = reserved / total
            backoff_weights[context] = gamma
            for wid, count in entries:
                lower = probs[k - 2][context[1:] + (wid,)]
                probs[k - 1][context + (wid,)] = (
                    max(count - _discount_for(count, discounts), 0.0) / total
                    + gamma * lower
                )

    logprobs = [
        {key: math.log10(p) for key, p in sorted(table.items())} for table in probs
    ]
    backoffs = {key: math.log10(g) for key, g in sorted(backoff_weights.items())}
    return NgramLanguageModel(
        order=order,
        smoothing=KNESER_NEY,
        words=words,
        word_ids=word_ids,
        logprobs=logprobs,
        backoffs=backoffs,
        bos_id=bos_id,
        eos_id=eos_id,
        unk_id=unk_id,
    )


def _train_mle(sents: list[list[str]]) -> NgramLanguageModel:
    counts = Counter(w for s in sents for w in s)
    words = sorted(counts)
    word_ids = {w: i for i, w in enumerate(words)}
    total = sum(counts.values())
    logprobs = [{(word_ids[w],): math.log10(c / total) for w, c in sorted(counts.items())}]
    return NgramLanguageModel(
        order=1,
        smoothing=MLE,
        words=words,
        word_ids=word_ids,
        logprobs=logprobs,
        backoffs={},
        bos_id=None,
        eos_id=None,
        unk_id=None,
    )


def perplexity(lm: NgramLanguageModel, tokens: Sequence) -> float:
    """Perplexity of a token stream: exp of average negative log probability.

    ``tokens`` is either a flat token sequence (scored as one sentence) or a
    sequence of sentences.  The event count includes one end-of-sentence
    symbol per sentence when the model uses padding.
    """
    toks = list(tokens)
    if toks and isinstance(toks[0], str):
        sentences: list = [toks]
    else:
        sentences = toks
    return lm.perplexity(sentences)
