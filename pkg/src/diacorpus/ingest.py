"""Markup parsing and metadata reconciliation for dirty source collections.

Documents arrive in a light markup: a header block of ``#KEY: value`` lines
(TITLE, AUTHOR, DOD_H, GENRE; unknown keys pass through) terminated by a
blank line, then the body.  Near-duplicate records are grouped, reported,
and used to fill metadata gaps -- never silently deleted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

from .corpus_core import normalize_text, tokenize

_HEADER_LINE = re.compile(r"#([A-Z0-9_]+):\s*(.*)$")

_KNOWN_KEYS = {"TITLE", "AUTHOR", "DOD_H", "GENRE"}


class MarkupParseError(ValueError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class RawRecord:
    """One parsed source document; dirty fields are legal."""

    source_path: str
    title: str
    author: str
    dod_hijri: int | None
    genre: str | None
    body: str
    extras: Mapping[str, str] = field(default_factory=dict)


def parse_document(markup: str, source_path: str = "") -> RawRecord:
    """Parse one markup document into a RawRecord.

    The header must be terminated by a blank line; a missing terminator or a
    malformed header line is a parse error carrying the offending line
    number.
    """
    lines = markup.split("\n")
    fields: dict[str, str] = {}
    extras: dict[str, str] = {}
    body_start: int | None = None
    for i, line in enumerate(lines):
        if line.strip() == "":
            body_start = i + 1
            break
        m = _HEADER_LINE.match(line)
        if m is None:
            raise MarkupParseError(f"malformed header line: {line!r}", i + 1)
        key, value = m.group(1), m.group(2).strip()
        if key in _KNOWN_KEYS:
            fields[key] = value
        else:
            extras[key] = value
    if body_start is None:
        raise MarkupParseError("header not terminated by a blank line", len(lines))
    body = "\n".join(lines[body_start:]).strip("\n")
    if not body.strip():
        raise MarkupParseError("document body is empty", body_start + 1)
    dod_hijri: int | None = None
    if fields.get("DOD_H"):
        try:
            dod_hijri = int(fields["DOD_H"])
        except ValueError:
            raise MarkupParseError(
                f"DOD_H is not an integer: {fields['DOD_H']!r}",
                1 + lines.index(next(l for l in lines if l.startswith("#DOD_H"))),
            ) from None
    return RawRecord(
        source_path=source_path,
        title=fields.get("TITLE", ""),
        author=fields.get("AUTHOR", ""),
        dod_hijri=dod_hijri,
        genre=fields.get("GENRE") or None,
        body=body,
        extras=extras,
    )


class GroupReason(str, Enum):
    TITLE_AUTHOR = "TitleAuthorMatch"
    BODY = "BodySimilarity"
    BOTH = "Both"


@dataclass(frozen=True)
class DuplicateGroup:
    members: tuple[int, ...]  # record indices, sorted
    canonical: int
    reason: GroupReason


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance; O(len(a) * len(b)) with a rolling row."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _title_author_key(record: RawRecord) -> str:
    return normalize_text(f"{record.title} {record.author}").casefold().strip()


def title_author_distance(a: RawRecord, b: RawRecord) -> float:
    """Normalized edit distance over the combined title+author string.

    Two records whose title and author are both empty never match (distance
    1.0): absent metadata is no evidence of identity.
    """
    ka, kb = _title_author_key(a), _title_author_key(b)
    longest = max(len(ka), len(kb))
    if longest == 0:
        return 1.0
    return levenshtein(ka, kb) / longest


def body_shingles(record: RawRecord, n: int = 5) -> frozenset[tuple[str, ...]]:
    words = tuple(t.surface for t in tokenize(normalize_text(record.body)))
    return frozenset(words[i : i + n] for i in range(len(words) - n + 1))


def body_similarity(a: RawRecord, b: RawRecord, n: int = 5) -> float:
    """Jaccard similarity of word n-gram shingle sets of the two bodies.

    Bodies too short to shingle compare as identical-or-nothing.
    """
    sa, sb = body_shingles(a, n), body_shingles(b, n)
    if not sa or not sb:
        ta = tuple(t.surface for t in tokenize(normalize_text(a.body)))
        tb = tuple(t.surface for t in tokenize(normalize_text(b.body)))
        return 1.0 if ta == tb else 0.0
    return len(sa & sb) / len(sa | sb)


def _metadata_completeness(record: RawRecord) -> int:
    return sum(
        (
            bool(record.title.strip()),
            bool(record.author.strip()),
            record.dod_hijri is not None,
            bool(record.genre),
        )
    )


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def group_duplicates(
    records: Sequence[RawRecord],
    title_author_threshold: float = 0.2,
    body_threshold: float = 0.8,
    shingle_size: int = 5,
) -> list[DuplicateGroup]:
    """Group likely duplicate records.

    Two records link when their normalized title+author edit distance is at
    most ``title_author_threshold`` or the Jaccard similarity of their body
    shingle sets is at least ``body_threshold``.  Groups are the connected
    components of the link graph; the canonical member is the record with
    the most non-empty metadata fields (ties to the lowest index).
    """
    n = len(records)
    shingles = [body_shingles(r, shingle_size) for r in records]
    uf = _UnionFind(n)
    edge_reasons: dict[int, set[GroupReason]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            ta_link = title_author_distance(records[i], records[j]) <= title_author_threshold
            si, sj = shingles[i], shingles[j]
            if si and sj:
                body_sim = len(si & sj) / len(si | sj)
            else:
                body_sim = body_similarity(records[i], records[j], shingle_size)
            body_link = body_sim >= body_threshold
            if not (ta_link or body_link):
                continue
            uf.union(i, j)
            root = uf.find(i)
            reasons = edge_reasons.setdefault(root, set())
            if ta_link:
                reasons.add(GroupReason.TITLE_AUTHOR)
            if body_link:
                reasons.add(GroupReason.BODY)
    components: dict[int, list[int]] = {}
    merged_reasons: dict[int, set[GroupReason]] = {}
    for i in range(n):
        root = uf.find(i)
        components.setdefault(root, []).append(i)
    for root, reasons in edge_reasons.items():
        merged_reasons.setdefault(uf.find(root), set()).update(reasons)
    groups = []
    for root in sorted(components):
        members = components[root]
        if len(members) < 2:
            continue
        reasons = merged_reasons.get(root, set())
        if len(reasons) == 2:
            reason = GroupReason.BOTH
        elif GroupReason.BODY in reasons:
            reason = GroupReason.BODY
        else:
            reason = GroupReason.TITLE_AUTHOR
        canonical = max(members, key=lambda i: (_metadata_completeness(records[i]), -i))
        groups.append(DuplicateGroup(members=tuple(members), canonical=canonical, reason=reason))
    return groups


@dataclass(frozen=True)
class MetadataConflict:
    group_index: int
    field_name: str
    values: tuple[tuple[int, object], ...]  # (record index, value)


def fill_missing_metadata(
    records: Sequence[RawRecord], groups: Sequence[DuplicateGroup]
) -> tuple[list[RawRecord], list[MetadataConflict]]:
    """Copy the canonical member's non-empty fields into members' gaps.

    Non-empty fields are never overwritten.  Conflicting non-empty
    ``dod_hijri`` values within a group are reported, not resolved, and no
    fill happens for that field in that group.
    """
    out = list(records)
    conflicts: list[MetadataConflict] = []
    for gi, group in enumerate(groups):
        canon = records[group.canonical]
        dods = {i: records[i].dod_hijri for i in group.members if records[i].dod_hijri is not None}
        dod_conflict = len(set(dods.values())) > 1
        if dod_conflict:
            conflicts.append(
                MetadataConflict(
                    group_index=gi,
                    field_name="dod_hijri",
                    values=tuple(sorted(dods.items())),
                )
            )
        for i in group.members:
            rec = out[i]
            updates: dict[str, object] = {}
            if not rec.title.strip() and canon.title.strip():
                updates["title"] = canon.title
            if not rec.author.strip() and canon.author.strip():
                updates["author"] = canon.author
            if rec.genre is None and canon.genre is not None:
                updates["genre"] = canon.genre
            if rec.dod_hijri is None and canon.dod_hijri is not None and not dod_conflict:
                updates["dod_hijri"] = canon.dod_hijri
            if updates:
                out[i] = replace(rec, **updates)
    return out, conflicts
