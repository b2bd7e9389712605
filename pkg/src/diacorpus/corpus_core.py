"""Document model, orthographic normalization, tokenization, and calendar conversion.

The canonical processing order for a document is raw text -> normalize_text
-> tokenize.  Documents are immutable once built and safe to share across
worker processes.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

# Alif variants folded to bare alif: madda, hamza above, hamza below, wasla.
_ALIF_VARIANTS = re.compile("[آأإٱ]")
# Tashkeel (harakat, tanwin, shadda, sukun), superscript alef, Quranic
# annotation marks, and the tatweel filler.
_DIACRITICS = re.compile(
    "[ؐ-ًؚ-ٰٟۖ-ۜ۟-۪ۨ-ۭـ]"
)
_ALIF_MAQSURA = "ى"
_YA = "ي"
_TA_MARBUTA = "ة"
_HA = "ه"
_WS_RUN = re.compile(r"\s+")

# Word tokens are maximal runs of Unicode word characters minus underscore;
# everything else (whitespace, punctuation, symbols) separates and is dropped.
_TOKEN_RE = re.compile(r"[^\W_]+")

# Sentence-final punctuation recognized between tokens: period, bang,
# question mark, Arabic question mark, Arabic full stop, ellipsis.
_SENTENCE_FINAL = frozenset(".!?؟۔…")


def normalize_text(
    raw: str,
    *,
    unify_alif: bool = True,
    alif_maqsura_to_ya: bool = True,
    ta_marbuta_to_ha: bool = True,
    strip_diacritics: bool = True,
) -> str:
    """Canonicalize text so matching and language models see one alphabet.

    Unifies alif variants to bare alif, maps alif maqsura to ya and ta
    marbuta to ha, strips Arabic diacritics and tatweel, and collapses
    whitespace runs to single spaces.  Idempotent; non-Arabic characters
    pass through unchanged.  The letter classes are individually togglable
    since the exact inventory is a matter of convention.
    """
    text = raw
    if strip_diacritics:
        text = _DIACRITICS.sub("", text)
    if unify_alif:
        text = _ALIF_VARIANTS.sub("ا", text)
    if alif_maqsura_to_ya:
        text = text.replace(_ALIF_MAQSURA, _YA)
    if ta_marbuta_to_ha:
        text = text.replace(_TA_MARBUTA, _HA)
    return _WS_RUN.sub(" ", text).strip()


@dataclass(frozen=True)
class Token:
    """A word token with its character offset into the normalized text."""

    surface: str
    char_offset: int


def tokenize(normalized: str) -> tuple[Token, ...]:
    """Split normalized text on whitespace and punctuation, discarding both."""
    return tuple(Token(m.group(), m.start()) for m in _TOKEN_RE.finditer(normalized))


def sentence_token_bounds(normalized: str, tokens: Sequence[Token]) -> tuple[int, ...]:
    """Exclusive token-index end of each sentence.

    A sentence break occurs after token i when any sentence-final punctuation
    character appears between token i and token i+1 (or after the last
    token).  A document with no such punctuation is a single sentence.
    """
    if not tokens:
        return ()
    bounds: list[int] = []
    for i, tok in enumerate(tokens):
        gap_start = tok.char_offset + len(tok.surface)
        gap_end = tokens[i + 1].char_offset if i + 1 < len(tokens) else len(normalized)
        if any(c in _SENTENCE_FINAL for c in normalized[gap_start:gap_end]):
            bounds.append(i + 1)
    if not bounds or bounds[-1] != len(tokens):
        bounds.append(len(tokens))
    return tuple(bounds)


def hijri_to_ce(year_h: int) -> int:
    """Convert a Hijri year to a Gregorian year.

    Linear approximation with floor; exact calendrical conversion is
    unnecessary at year granularity.
    """
    if year_h < 1:
        raise ValueError(f"Hijri year must be >= 1, got {year_h}")
    return math.floor(0.970225 * year_h + 621.5716)


class DatingStatus(str, Enum):
    DATED = "Dated"
    UNDATED = "Undated"
    AUTO_DATED = "AutoDated"


@dataclass(frozen=True)
class Metadata:
    """Per-document metadata; death-of-author year is the dating proxy."""

    doc_id: str
    title: str = ""
    author: str = ""
    author_code: int | None = None
    dod_hijri: int | None = None
    dod_ce: int | None = None
    genre: str | None = None
    word_count: int = 0
    dating_status: DatingStatus = DatingStatus.UNDATED

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if self.word_count < 0:
            raise ValueError(f"{self.doc_id}: word_count must be >= 0")
        if self.dod_hijri is not None:
            expected_ce = hijri_to_ce(self.dod_hijri)
            if self.dod_ce is None:
                object.__setattr__(self, "dod_ce", expected_ce)
            elif self.dod_ce != expected_ce:
                raise ValueError(
                    f"{self.doc_id}: dod_ce {self.dod_ce} inconsistent with "
                    f"dod_hijri {self.dod_hijri} (expected {expected_ce})"
                )
        if self.dating_status is DatingStatus.UNDATED and self.dod_hijri is not None:
            raise ValueError(f"{self.doc_id}: Undated document carries dod_hijri")
        if self.dating_status is not DatingStatus.UNDATED and self.dod_hijri is None:
            raise ValueError(f"{self.doc_id}: {self.dating_status.value} document lacks dod_hijri")


@dataclass(frozen=True)
class Document:
    """An immutable document: metadata, raw and normalized text, tokens.

    ``lemmas``, when present, is parallel to ``tokens`` (one lemma per
    token).  ``sentence_bounds`` holds the exclusive token-index end of each
    sentence.
    """

    meta: Metadata
    raw_text: str
    normalized_text: str
    tokens: tuple[Token, ...]
    sentence_bounds: tuple[int, ...]
    lemmas: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.lemmas is not None and len(self.lemmas) != len(self.tokens):
            raise LemmaAlignmentError(
                f"{self.meta.doc_id}: {len(self.lemmas)} lemmas for "
                f"{len(self.tokens)} tokens"
            )

    @classmethod
    def from_raw(
        cls, meta: Metadata, raw_text: str, lemmas: Sequence[str] | None = None
    ) -> "Document":
        normalized = normalize_text(raw_text)
        tokens = tokenize(normalized)
        bounds = sentence_token_bounds(normalized, tokens)
        meta = replace(meta, word_count=len(tokens))
        return cls(
            meta=meta,
            raw_text=raw_text,
            normalized_text=normalized,
            tokens=tokens,
            sentence_bounds=bounds,
            lemmas=tuple(lemmas) if lemmas is not None else None,
        )

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def sentences(self, *, use_lemmas: bool = False) -> list[list[str]]:
        """Token surfaces (or lemmas) grouped by sentence."""
        words = list(self.lemmas) if use_lemmas else self.surfaces()
        if use_lemmas and self.lemmas is None:
            raise ValueError(f"{self.meta.doc_id}: document is not lemmatized")
        out: list[list[str]] = []
        start = 0
        for end in self.sentence_bounds:
            out.append(words[start:end])
            start = end
        return out


class LemmaAlignmentError(ValueError):
    """Lemma sequence does not line up one-to-one with a document's tokens."""


class LemmaSource(Protocol):
    def lemmas_for(self, doc: Document) -> Sequence[str]: ...


@dataclass(frozen=True)
class ExternalAnalyzerOutput:
    """Adapter over a morphological analyzer's per-document lemma sidecars.

    A sidecar is a plain-text file ``<doc_id>.lemmas`` with one lemma per
    line, line i corresponding to token i.
    """

    lemmas_by_doc: Mapping[str, tuple[str, ...]]

    @classmethod
    def from_dir(cls, lemma_dir: Path | str, doc_ids: Iterable[str]) -> "ExternalAnalyzerOutput":
        lemma_dir = Path(lemma_dir)
        table: dict[str, tuple[str, ...]] = {}
        for doc_id in doc_ids:
            path = lemma_dir / f"{doc_id}.lemmas"
            if path.exists():
                lines = path.read_text(encoding="utf-8").splitlines()
                table[doc_id] = tuple(lines)
        return cls(lemmas_by_doc=table)

    def lemmas_for(self, doc: Document) -> Sequence[str]:
        doc_id = doc.meta.doc_id
        if doc_id not in self.lemmas_by_doc:
            raise LemmaAlignmentError(f"{doc_id}: no lemma sidecar found")
        return self.lemmas_by_doc[doc_id]


# Affixes are matched longest-first in normalized orthography; a strip is
# applied only when at least 3 characters remain.
_STEM_PREFIXES = (
    "وبال",  # w-b-al
    "فبال",  # f-b-al
    "وال",  # w-al
    "فال",  # f-al
    "بال",  # b-al
    "كال",  # k-al
    "لل",  # li-l
    "ال",  # al
    "و",  # wa
)
_STEM_SUFFIXES = (
    "هما",  # -humaa
    "كما",  # -kumaa
    "ها",  # -haa
    "هم",  # -hum
    "هن",  # -hunna
    "كم",  # -kum
    "نا",  # -naa
    "ات",  # -aat
    "ان",  # -aan
    "ون",  # -uun
    "ين",  # -iin
    "يه",  # -iih
    "ه",  # -h (incl. normalized ta marbuta)
    "ي",  # -ii
    "ا",  # -aa
)


@dataclass(frozen=True)
class FallbackStemmer:
    """Rule-based prefix/suffix stripper used when no analyzer output exists.

    Deterministic and surjective onto the surface vocabulary: tokens without
    a known affix map to themselves.
    """

    min_stem_len: int = 3

    def stem(self, word: str) -> str:
        stem = word
        for prefix in _STEM_PREFIXES:
            if stem.startswith(prefix) and len(stem) - len(prefix) >= self.min_stem_len:
                stem = stem[len(prefix):]
                break
        for suffix in _STEM_SUFFIXES:
            if stem.endswith(suffix) and len(stem) - len(suffix) >= self.min_stem_len:
                stem = stem[: -len(suffix)]
                break
        return stem

    def lemmas_for(self, doc: Document) -> Sequence[str]:
        return [self.stem(t.surface) for t in doc.tokens]


def lemmatize(doc: Document, analyzer: LemmaSource) -> Document:
    """Return a copy of ``doc`` with lemmas populated, one per token."""
    lemmas = tuple(analyzer.lemmas_for(doc))
    if len(lemmas) != len(doc.tokens):
        raise LemmaAlignmentError(
            f"{doc.meta.doc_id}: analyzer produced {len(lemmas)} lemmas for "
            f"{len(doc.tokens)} tokens"
        )
    return replace(doc, lemmas=lemmas)


def vocab_stats(corpus: Iterable[Document]) -> tuple[int, int]:
    """Count distinct surface forms and distinct lemmas across a corpus."""
    surfaces: set[str] = set()
    lemmas: set[str] = set()
    for doc in corpus:
        if doc.lemmas is None:
            raise ValueError(f"{doc.meta.doc_id}: document is not lemmatized")
        surfaces.update(t.surface for t in doc.tokens)
        lemmas.update(doc.lemmas)
    return len(surfaces), len(lemmas)


# --- corpus directory layout -------------------------------------------------
#
# <corpus_dir>/metadata.jsonl   one JSON object per document
# <corpus_dir>/<doc_id>.txt     UTF-8 plain text
# <corpus_dir>/<doc_id>.lemmas  optional sidecar, one lemma per line


def metadata_to_json(meta: Metadata) -> dict:
    return {
        "doc_id": meta.doc_id,
        "title": meta.title,
        "author": meta.author,
        "author_code": meta.author_code,
        "dod_hijri": meta.dod_hijri,
        "dod_ce": meta.dod_ce,
        "genre": meta.genre,
        "word_count": meta.word_count,
        "dating_status": meta.dating_status.value,
    }


def metadata_from_json(obj: Mapping) -> Metadata:
    return Metadata(
        doc_id=obj["doc_id"],
        title=obj.get("title") or "",
        author=obj.get("author") or "",
        author_code=obj.get("author_code"),
        dod_hijri=obj.get("dod_hijri"),
        dod_ce=obj.get("dod_ce"),
        genre=obj.get("genre"),
        word_count=obj.get("word_count") or 0,
        dating_status=DatingStatus(obj.get("dating_status", "Undated")),
    )


def load_metadata(path: Path | str) -> list[Metadata]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"metadata file not found: {path}")
    metas = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                metas.append(metadata_from_json(json.loads(line)))
    return metas


def save_metadata(metas: Iterable[Metadata], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for meta in metas:
            fh.write(json.dumps(metadata_to_json(meta), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_corpus(
    corpus_dir: Path | str,
    lemma_dir: Path | str | None = None,
    *,
    require_lemmas: bool = False,
) -> list[Document]:
    """Load a corpus directory into Document objects, in metadata order.

    Lemma sidecars are looked up in ``lemma_dir`` (defaults to the corpus
    directory) and attached when present; their length is validated against
    the token count.
    """
    corpus_dir = Path(corpus_dir)
    lemma_dir = Path(lemma_dir) if lemma_dir is not None else corpus_dir
    metas = load_metadata(corpus_dir / "metadata.jsonl")
    docs: list[Document] = []
    for meta in metas:
        text_path = corpus_dir / f"{meta.doc_id}.txt"
        if not text_path.exists():
            raise FileNotFoundError(f"document text not found: {text_path}")
        raw = text_path.read_text(encoding="utf-8")
        doc = Document.from_raw(meta, raw)
        sidecar = lemma_dir / f"{meta.doc_id}.lemmas"
        if sidecar.exists():
            lemmas = sidecar.read_text(encoding="utf-8").splitlines()
            if len(lemmas) != len(doc.tokens):
                raise LemmaAlignmentError(
                    f"{meta.doc_id}: sidecar {sidecar} has {len(lemmas)} lemmas "
                    f"for {len(doc.tokens)} tokens"
                )
            doc = replace(doc, lemmas=tuple(lemmas))
        elif require_lemmas:
            raise LemmaAlignmentError(f"{meta.doc_id}: no lemma sidecar found in {lemma_dir}")
        docs.append(doc)
    return docs


def save_lemma_sidecar(doc: Document, lemma_dir: Path | str) -> Path:
    if doc.lemmas is None:
        raise ValueError(f"{doc.meta.doc_id}: document is not lemmatized")
    lemma_dir = Path(lemma_dir)
    lemma_dir.mkdir(parents=True, exist_ok=True)
    path = lemma_dir / f"{doc.meta.doc_id}.lemmas"
    path.write_text("\n".join(doc.lemmas) + ("\n" if doc.lemmas else ""), encoding="utf-8")
    return path
