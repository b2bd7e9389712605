"""Perplexity-based text dating: period bins, per-bin models, ranking, evaluation.

One language model is trained per 100-year period; a document's candidate
periods are ranked by increasing perplexity.  Undated documents are assigned
the top-ranked bin together with a confusion index (ratio of the two best
perplexities) that serves as a manual-review triage score.
"""

from __future__ import annotations

import csv
import json
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ..corpus_core import Document
from .arpa import read_arpa, write_arpa
from .ngram_lm import KNESER_NEY, NgramLanguageModel, train_lm

DEFAULT_EXCLUDE_GENRES = frozenset({"dictionary"})


@dataclass(frozen=True, order=True)
class PeriodBin:
    """An inclusive Hijri year range acting as a dating class."""

    start_h: int
    end_h: int

    def __post_init__(self) -> None:
        if self.start_h > self.end_h:
            raise ValueError(f"bin start {self.start_h} > end {self.end_h}")

    @property
    def label(self) -> str:
        return f"{self.start_h}-{self.end_h}"

    def contains(self, year_h: int) -> bool:
        return self.start_h <= year_h <= self.end_h


def default_bins() -> list[PeriodBin]:
    """The standard 14 bins: 1-200, 201-300, ..., 1301-1400, 1401-1436.

    The first two centuries are merged (too few early texts to stand alone)
    and the last bin runs to the latest year in the corpus.
    """
    bins = [PeriodBin(1, 200)]
    bins += [PeriodBin(start, start + 99) for start in range(201, 1301, 100)]
    bins.append(PeriodBin(1401, 1436))
    return bins


def validate_bins(bins: Sequence[PeriodBin]) -> None:
    ordered = sorted(bins)
    if list(bins) != ordered:
        raise ValueError("bins must be in ascending order")
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start_h <= prev.end_h:
            raise ValueError(f"bins {prev.label} and {cur.label} overlap")


def assign_bin(dod_hijri: int, bins: Sequence[PeriodBin]) -> PeriodBin:
    for b in bins:
        if b.contains(dod_hijri):
            return b
    raise ValueError(f"year {dod_hijri} is outside all period bins")


def split_train_test(
    dated_docs: Sequence[Document],
    train_fraction: float = 0.8,
    seed: int = 0,
    exclude_genres: frozenset[str] = DEFAULT_EXCLUDE_GENRES,
) -> tuple[list[Document], list[Document]]:
    """Deterministic per-document split; excluded genres appear in neither side."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    excluded = {g.casefold() for g in exclude_genres}
    eligible = [
        d for d in dated_docs
        if (d.meta.genre or "").casefold() not in excluded
    ]
    for d in eligible:
        if d.meta.dod_hijri is None:
            raise ValueError(f"{d.meta.doc_id}: undated document in dated split")
    eligible = sorted(eligible, key=lambda d: d.meta.doc_id)
    random.Random(seed).shuffle(eligible)
    n_train = int(len(eligible) * train_fraction)
    return eligible[:n_train], eligible[n_train:]


@dataclass(frozen=True)
class PeriodLanguageModel:
    bin: PeriodBin
    lm: NgramLanguageModel


def _train_one(args) -> NgramLanguageModel:
    sentences, order, min_count = args
    return train_lm(sentences, order=order, smoothing=KNESER_NEY, min_count=min_count)


def train_period_models(
    docs: Sequence[Document],
    bins: Sequence[PeriodBin] | None = None,
    order: int = 5,
    min_count: int = 2,
    use_lemmas: bool = False,
    workers: int = 1,
) -> list[PeriodLanguageModel]:
    """Train one model per bin from the documents falling in it.

    Bins with no documents are skipped.  Per-bin training is independent and
    runs across ``workers`` processes when more than one is requested.
    """
    bins = list(bins) if bins is not None else default_bins()
    validate_bins(bins)
    sentences_by_bin: dict[PeriodBin, list[list[str]]] = {b: [] for b in bins}
    for doc in docs:
        if doc.meta.dod_hijri is None:
            raise ValueError(f"{doc.meta.doc_id}: cannot train on an undated document")
        b = assign_bin(doc.meta.dod_hijri, bins)
        sentences_by_bin[b].extend(doc.sentences(use_lemmas=use_lemmas))
    populated = [b for b in bins if sentences_by_bin[b]]
    jobs = [(sentences_by_bin[b], order, min_count) for b in populated]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(_train_one, jobs))
    else:
        models = [_train_one(job) for job in jobs]
    return [PeriodLanguageModel(bin=b, lm=m) for b, m in zip(populated, models)]


@dataclass(frozen=True)
class DateRanking:
    doc_id: str
    ranked: tuple[tuple[PeriodBin, float], ...]  # ascending perplexity

    def rank_of(self, bin_: PeriodBin) -> int:
        """1-based rank of a bin in this ranking."""
        for i, (b, _) in enumerate(self.ranked, start=1):
            if b == bin_:
                return i
        raise KeyError(bin_.label)


def rank_dates(
    models: Sequence[PeriodLanguageModel],
    doc: Document,
    use_lemmas: bool = False,
) -> DateRanking:
    """Score a document against every period model, best (lowest) first.

    Ties break toward the earlier bin; the result is independent of the
    order in which models are supplied.
    """
    sentences = doc.sentences(use_lemmas=use_lemmas)
    scored = [(plm.bin, plm.lm.perplexity(sentences)) for plm in models]
    scored.sort(key=lambda pair: (pair[1], pair[0].start_h))
    return DateRanking(doc_id=doc.meta.doc_id, ranked=tuple(scored))


@dataclass(frozen=True)
class EvalReport:
    bin_labels: tuple[str, ...]
    accuracy_at_k: Mapping[int, float]  # percentage, k = 1..#bins
    random_baseline: float
    majority_baseline: float
    confusion: tuple[tuple[int, ...], ...]  # rows: true bin, cols: top-1 bin
    doc_count: int


def evaluate(
    rankings: Sequence[DateRanking],
    gold_bins: Mapping[str, PeriodBin],
) -> EvalReport:
    """Accuracy@k, baselines, and a top-1 confusion matrix.

    accuracy@k is the percentage of documents whose true bin appears among
    the k lowest-perplexity candidates; the random baseline is 100 / #bins
    and the majority baseline is the share of the largest true bin.
    """
    if {r.doc_id for r in rankings} != set(gold_bins):
        missing = {r.doc_id for r in rankings} ^ set(gold_bins)
        raise ValueError(f"rankings and gold labels disagree on documents: {sorted(missing)}")
    if not rankings:
        raise ValueError("nothing to evaluate")
    bins = [b for b, _ in rankings[0].ranked]
    n_bins = len(bins)
    bin_index = {b: i for i, b in enumerate(bins)}
    hits_at = [0] * (n_bins + 1)
    confusion = [[0] * n_bins for _ in range(n_bins)]
    gold_counts = [0] * n_bins
    for ranking in rankings:
        gold = gold_bins[ranking.doc_id]
        rank = ranking.rank_of(gold)
        hits_at[rank] += 1
        predicted = ranking.ranked[0][0]
        confusion[bin_index[gold]][bin_index[predicted]] += 1
        gold_counts[bin_index[gold]] += 1
    total = len(rankings)
    cumulative = 0
    accuracy = {}
    for k in range(1, n_bins + 1):
        cumulative += hits_at[k]
        accuracy[k] = 100.0 * cumulative / total
    return EvalReport(
        bin_labels=tuple(b.label for b in bins),
        accuracy_at_k=accuracy,
        random_baseline=100.0 / n_bins,
        majority_baseline=100.0 * max(gold_counts) / total,
        confusion=tuple(tuple(row) for row in confusion),
        doc_count=total,
    )


@dataclass(frozen=True)
class AutoDateResult:
    doc_id: str
    ranked: tuple[tuple[PeriodBin, float], ...]  # truncated to top_n
    confusion_index: float  # best / second-best perplexity, in (0, 1]

    @property
    def top_bin(self) -> PeriodBin:
        return self.ranked[0][0]


def autodate(
    models: Sequence[PeriodLanguageModel],
    undated_docs: Sequence[Document],
    top_n: int = 3,
    use_lemmas: bool = False,
) -> list[AutoDateResult]:
    """Date undated documents, most confident first.

    The models should be trained on the entire dated corpus.  The confusion
    index is the ratio of the best to the second-best perplexity: near 0
    means a clear winner, near 1 means the top candidates are hard to tell
    apart.  Results are sorted ascending by confusion index so the output
    doubles as a triage queue.
    """
    results = []
    for doc in undated_docs:
        ranking = rank_dates(models, doc, use_lemmas=use_lemmas)
        if len(ranking.ranked) >= 2:
            index = ranking.ranked[0][1] / ranking.ranked[1][1]
        else:
            index = 1.0
        results.append(
            AutoDateResult(
                doc_id=doc.meta.doc_id,
                ranked=ranking.ranked[:top_n],
                confusion_index=index,
            )
        )
    results.sort(key=lambda r: (r.confusion_index, r.doc_id))
    return results


# --- on-disk artifacts --------------------------------------------------------

_BIN_FILE = re.compile(r"^(\d+)-(\d+)\.arpa$")


def save_period_models(models: Sequence[PeriodLanguageModel], models_dir: Path | str) -> None:
    models_dir = Path(models_dir)
    models_dir.mkdir(parents=True, exist_ok=True)
    for plm in models:
        write_arpa(plm.lm, models_dir / f"{plm.bin.label}.arpa")


def load_period_models(models_dir: Path | str) -> list[PeriodLanguageModel]:
    models_dir = Path(models_dir)
    if not models_dir.is_dir():
        raise FileNotFoundError(f"models directory not found: {models_dir}")
    models = []
    for path in sorted(models_dir.glob("*.arpa")):
        m = _BIN_FILE.match(path.name)
        if m is None:
            raise ValueError(f"model file name {path.name} is not <start>-<end>.arpa")
        bin_ = PeriodBin(int(m.group(1)), int(m.group(2)))
        models.append(PeriodLanguageModel(bin=bin_, lm=read_arpa(path)))
    if not models:
        raise FileNotFoundError(f"no .arpa model files in {models_dir}")
    models.sort(key=lambda plm: plm.bin)
    return models


def write_split_json(train: Sequence[Document], test: Sequence[Document], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {
        "train": [d.meta.doc_id for d in train],
        "test": [d.meta.doc_id for d in test],
    }
    path.write_text(
        json.dumps(record, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def read_split_json(path: Path | str) -> tuple[list[str], list[str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"split file not found: {path}")
    record = json.loads(path.read_text(encoding="utf-8"))
    return list(record["train"]), list(record["test"])


def write_eval_json(report: EvalReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {
        "bin_labels": list(report.bin_labels),
        "accuracy_at_k": {str(k): v for k, v in sorted(report.accuracy_at_k.items())},
        "random_baseline": report.random_baseline,
        "majority_baseline": report.majority_baseline,
        "doc_count": report.doc_count,
    }
    path.write_text(
        json.dumps(record, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def write_confusion_csv(report: EvalReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true_bin"] + list(report.bin_labels))
        for label, row in zip(report.bin_labels, report.confusion):
            writer.writerow([label] + list(row))


def write_autodate_jsonl(results: Sequence[AutoDateResult], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for r in results:
            row = {
                "doc_id": r.doc_id,
                "ranked": [
                    {"bin": b.label, "perplexity": ppl} for b, ppl in r.ranked
                ],
                "confusion_index": r.confusion_index,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
