"""Read and write n-gram models in the standard ARPA text format.

Probabilities and backoff weights are log10 and written with shortest
round-trip float representation, so a save/load cycle reproduces scores
bit-exactly.  The start symbol gets the conventional -99 placeholder
probability; it is only ever used as context.
"""

from __future__ import annotations

from pathlib import Path

from .ngram_lm import BOS, EOS, KNESER_NEY, UNK, Ngram, NgramLanguageModel

_PLACEHOLDER = -99.0


def _format(value: float) -> str:
    return repr(value)


def write_arpa(model: NgramLanguageModel, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    order = model.order

    entries: list[dict[Ngram, float]] = [dict(t) for t in model.logprobs]
    if model.bos_id is not None and (model.bos_id,) not in entries[0]:
        entries[0][(model.bos_id,)] = _PLACEHOLDER

    def gram_words(key: Ngram) -> str:
        return " ".join(model.words[wid] for wid in key)

    lines: list[str] = ["\\data\\"]
    for k in range(1, order + 1):
        lines.append(f"ngram {k}={len(entries[k - 1])}")
    for k in range(1, order + 1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        for key in sorted(entries[k - 1], key=gram_words):
            row = f"{_format(entries[k - 1][key])}\t{gram_words(key)}"
            if k < order and key in model.backoffs:
                row += f"\t{_format(model.backoffs[key])}"
            lines.append(row)
    lines.append("")
    lines.append("\\end\\")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_arpa(path: Path | str) -> NgramLanguageModel:
    path = Path(path)
    counts: dict[int, int] = {}
    tables: dict[int, dict[tuple[str, ...], tuple[float, float | None]]] = {}
    section = None
    with path.open(encoding="utf-8") as fh:
        lines = iter(fh)
        for line in lines:
            line = line.strip()
            if line == "\\data\\":
                section = "data"
            elif line.endswith("-grams:") and line.startswith("\\"):
                k = int(line[1:].split("-", 1)[0])
                section = k
                tables[k] = {}
            elif line == "\\end\\":
                break
            elif not line:
                continue
            elif section == "data" and line.startswith("ngram "):
                k_str, n_str = line[len("ngram "):].split("=")
                counts[int(k_str)] = int(n_str)
            elif isinstance(section, int):
                parts = line.split("\t")
                if len(parts) == 1:  # tolerate space-separated files
                    parts = line.split()
                    parts = [parts[0], " ".join(parts[1:section + 1])] + parts[section + 1:]
                logp = float(parts[0])
                gram = tuple(parts[1].split(" "))
                bow = float(parts[2]) if len(parts) > 2 else None
                tables[section][gram] = (logp, bow)
    if not tables:
        raise ValueError(f"{path}: not an ARPA file (no n-gram sections)")
    order = max(tables)
    for k, expected in counts.items():
        if k in tables and len(tables[k]) != expected:
            raise ValueError(
                f"{path}: header declares {expected} {k}-grams, found {len(tables[k])}"
            )

    words: list[str] = []
    word_ids: dict[str, int] = {}

    def wid_of(word: str) -> int:
        wid = word_ids.get(word)
        if wid is None:
            wid = len(words)
            word_ids[word] = wid
            words.append(word)
        return wid

    for symbol in (BOS, EOS, UNK):
        wid_of(symbol)

    logprobs: list[dict[Ngram, float]] = [dict() for _ in range(order)]
    backoffs: dict[Ngram, float] = {}
    for k in range(1, order + 1):
        for gram, (logp, bow) in tables.get(k, {}).items():
            key = tuple(wid_of(w) for w in gram)
            logprobs[k - 1][key] = logp
            if bow is not None:
                backoffs[key] = bow
    return NgramLanguageModel(
        order=order,
        smoothing=KNESER_NEY,
        words=words,
        word_ids=word_ids,
        logprobs=logprobs,
        backoffs=backoffs,
        bos_id=word_ids[BOS],
        eos_id=word_ids[EOS],
        unk_id=word_ids.get(UNK),
    )
