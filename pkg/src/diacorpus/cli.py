"""Command-line entry point: one binary, one subcommand per pipeline stage.

Stages read and write plain files so intermediate artifacts can be inspected
and stages rerun independently.  Progress goes to standard error; data goes
to files.  Exit codes: 0 success, 1 user error (bad arguments, missing
prerequisite artifacts), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import analytics
from . import ingest as ingest_mod
from . import report as report_mod
from . import reuse
from .config import ConfigError, PipelineConfig
from .corpus_core import (
    DatingStatus,
    Document,
    ExternalAnalyzerOutput,
    FallbackStemmer,
    LemmaAlignmentError,
    Metadata,
    hijri_to_ce,
    lemmatize,
    load_corpus,
    save_lemma_sidecar,
    save_metadata,
    vocab_stats,
)
from .dating import (
    PeriodBin,
    PeriodLanguageModel,
    assign_bin,
    autodate,
    default_bins,
    evaluate,
    load_period_models,
    rank_dates,
    read_split_json,
    save_period_models,
    split_train_test,
    train_period_models,
    write_autodate_jsonl,
    write_confusion_csv,
    write_eval_json,
    write_split_json,
)
from .ingest import MarkupParseError

logger = logging.getLogger("diacorpus")


class UserError(Exception):
    """Bad input from the operator: wrong flags, missing files, bad data."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are user errors, exit code 1
        raise UserError(f"{message}\n{self.format_usage()}")


_CONFIG_FLAGS: list[tuple[str, str, type]] = [
    ("--corpus-dir", "corpus_dir", str),
    ("--output-dir", "output_dir", str),
    ("--workers", "workers", int),
    ("--seed", "seed", int),
]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    for flag, dest, typ in _CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=typ, default=argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")


def _opt(parser, flag: str, dest: str, typ=None, **kwargs) -> None:
    if typ is bool:
        parser.add_argument(flag, dest=dest, action="store_true", default=argparse.SUPPRESS, **kwargs)
    else:
        parser.add_argument(flag, dest=dest, type=typ, default=argparse.SUPPRESS, **kwargs)


def build_parser() -> _Parser:
    parser = _Parser(prog="diacorpus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse markup files, reconcile metadata, emit a corpus")
    _add_common(p)
    p.add_argument("--input-dir", required=True, help="directory of markup documents")
    _opt(p, "--title-author-threshold", "title_author_threshold", float)
    _opt(p, "--body-threshold", "body_threshold", float)
    _opt(p, "--shingle-size", "shingle_size", int)

    p = sub.add_parser("normalize", help="write normalized document texts and word counts")
    _add_common(p)

    p = sub.add_parser("lemmatize", help="produce lemma sidecars")
    _add_common(p)
    p.add_argument("--analyzer", choices=["fallback", "external"], default="fallback")
    p.add_argument("--lemma-dir", help="sidecar directory for --analyzer external")

    p = sub.add_parser("reuse-boilerplate", help="mark frequently-recurring passages")
    _add_common(p)
    _opt(p, "--passage-len", "passage_len", int)
    _opt(p, "--recurrence-threshold", "recurrence_threshold", int)
    _opt(p, "--use-lemmas", "reuse_use_lemmas", bool)
    p.add_argument("--lemma-dir", help="sidecar directory when hashing lemmas")

    p = sub.add_parser("reuse-index", help="build the skip-gram posting index")
    _add_common(p)
    _opt(p, "--posting-cap", "posting_cap", int)
    _opt(p, "--use-lemmas", "reuse_use_lemmas", bool)
    p.add_argument("--lemma-dir", help="sidecar directory when hashing lemmas")

    p = sub.add_parser("reuse-match", help="chain index seeds into passage matches")
    _add_common(p)
    _opt(p, "--min-match-len", "min_match_len", int)
    _opt(p, "--max-gap", "max_gap", int)

    p = sub.add_parser("date-train", help="split the dated corpus and train per-period models")
    _add_common(p)
    _opt(p, "--order", "lm_order", int)
    _opt(p, "--min-count", "min_count", int)
    _opt(p, "--train-fraction", "train_fraction", float)
    _opt(p, "--use-lemmas", "dating_use_lemmas", bool)
    p.add_argument("--lemma-dir")

    p = sub.add_parser("date-eval", help="rank test documents and report accuracy")
    _add_common(p)
    _opt(p, "--use-lemmas", "dating_use_lemmas", bool)
    p.add_argument("--lemma-dir")

    p = sub.add_parser("date-auto", help="date undated documents with full-corpus models")
    _add_common(p)
    _opt(p, "--order", "lm_order", int)
    _opt(p, "--min-count", "min_count", int)
    _opt(p, "--top-n", "top_n", int)
    _opt(p, "--use-lemmas", "dating_use_lemmas", bool)
    p.add_argument("--lemma-dir")

    p = sub.add_parser("lifespan", help="per-lemma first/last attestations and statistics")
    _add_common(p)
    _opt(p, "--min-frequency", "min_lemma_frequency", int)
    _opt(p, "--include-autodated", "include_autodated", bool)
    _opt(p, "--surfaces", "use_surfaces", bool)
    _opt(p, "--hist-bucket-years", "lifespan_bucket_years", int)
    p.add_argument("--lemma-dir")

    p = sub.add_parser("concord", help="date-sorted concordance for a lemma")
    _add_common(p)
    p.add_argument("--lemma", required=True, help="query lemma (or surface with --surfaces)")
    _opt(p, "--window", "concord_window", int)
    _opt(p, "--include-autodated", "include_autodated", bool)
    _opt(p, "--surfaces", "use_surfaces", bool)
    p.add_argument("--lemma-dir")

    p = sub.add_parser("counts", help="word and text counts per period")
    _add_common(p)
    _opt(p, "--bucket-years", "bucket_years", int)
    _opt(p, "--include-autodated", "include_autodated", bool)

    p = sub.add_parser("report", help="render figures and report.md from pipeline outputs")
    _add_common(p)

    return parser


def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_file(args.config)
    else:
        cfg = PipelineConfig()
    overrides = {}
    for name in vars(cfg):
        if hasattr(args, name):
            overrides[name] = getattr(args, name)
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _out(cfg: PipelineConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_documents(cfg: PipelineConfig, args) -> list[Document]:
    lemma_dir = getattr(args, "lemma_dir", None)
    try:
        return load_corpus(cfg.corpus_dir, lemma_dir)
    except FileNotFoundError as exc:
        raise UserError(str(exc)) from exc


def _dated_only(docs: list[Document]) -> list[Document]:
    kept = [d for d in docs if d.meta.dating_status is not DatingStatus.UNDATED]
    skipped = len(docs) - len(kept)
    if skipped:
        logger.info("skipping %d undated document(s)", skipped)
    return kept


def _token_corpus(cfg: PipelineConfig, args) -> list[tuple[str, list[str]]]:
    docs = _load_documents(cfg, args)
    try:
        return reuse.token_corpus(docs, use_lemmas=cfg.reuse_use_lemmas)
    except ValueError as exc:
        raise UserError(f"{exc}; run lemmatize first or drop --use-lemmas") from exc


def _bins(cfg: PipelineConfig) -> list[PeriodBin]:
    if cfg.bins is None:
        return default_bins()
    return [PeriodBin(start, end) for start, end in cfg.bins]


def _write_json(obj, path: Path) -> None:
    path.write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def cmd_ingest(cfg: PipelineConfig, args) -> None:
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        raise UserError(f"input directory not found: {input_dir}")
    files = sorted(p for p in input_dir.iterdir() if p.is_file())
    if not files:
        raise UserError(f"no markup files in {input_dir}")
    records = []
    doc_ids = []
    for path in files:
        try:
            records.append(
                ingest_mod.parse_document(path.read_text(encoding="utf-8"), source_path=str(path))
            )
        except MarkupParseError as exc:
            raise UserError(f"{path}: {exc}") from exc
        doc_ids.append(path.stem)
    if len(set(doc_ids)) != len(doc_ids):
        raise UserError("markup file stems must be unique (they become doc ids)")
    groups = ingest_mod.group_duplicates(
        records, cfg.title_author_threshold, cfg.body_threshold, cfg.shingle_size
    )
    records, conflicts = ingest_mod.fill_missing_metadata(records, groups)
    out = _out(cfg)
    metas = []
    for doc_id, record in zip(doc_ids, records):
        (out / f"{doc_id}.txt").write_text(record.body, encoding="utf-8")
        dated = record.dod_hijri is not None
        meta = Metadata(
            doc_id=doc_id,
            title=record.title,
            author=record.author,
            dod_hijri=record.dod_hijri,
            dod_ce=hijri_to_ce(record.dod_hijri) if dated else None,
            genre=record.genre,
            word_count=0,
            dating_status=DatingStatus.DATED if dated else DatingStatus.UNDATED,
        )
        metas.append(Document.from_raw(meta, record.body).meta)
    save_metadata(metas, out / "metadata.jsonl")
    with (out / "duplicates.jsonl").open("w", encoding="utf-8") as fh:
        for gi, group in enumerate(groups):
            row = {
                "group_id": gi,
                "members": [doc_ids[i] for i in group.members],
                "canonical": doc_ids[group.canonical],
                "reason": group.reason.value,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    with (out / "conflicts.jsonl").open("w", encoding="utf-8") as fh:
        for conflict in conflicts:
            row = {
                "group_id": conflict.group_index,
                "field": conflict.field_name,
                "values": {doc_ids[i]: v for i, v in conflict.values},
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    logger.info(
        "ingested %d documents, %d duplicate group(s), %d conflict(s)",
        len(records), len(groups), len(conflicts),
    )


def cmd_normalize(cfg: PipelineConfig, args) -> None:
    docs = _load_documents(cfg, args)
    out = _out(cfg)
    for doc in docs:
        (out / f"{doc.meta.doc_id}.txt").write_text(doc.normalized_text, encoding="utf-8")
    save_metadata([d.meta for d in docs], out / "metadata.jsonl")
    logger.info("normalized %d documents, %d tokens total",
                len(docs), sum(d.meta.word_count for d in docs))


def cmd_lemmatize(cfg: PipelineConfig, args) -> None:
    docs = _load_documents(cfg, args)
    if args.analyzer == "external":
        sidecar_dir = Path(args.lemma_dir or cfg.corpus_dir)
        analyzer = ExternalAnalyzerOutput.from_dir(sidecar_dir, [d.meta.doc_id for d in docs])
    else:
        analyzer = FallbackStemmer()
    out = _out(cfg)
    lemma_out = out / "lemmas"
    lemmatized = []
    for doc in docs:
        try:
            lemmatized.append(lemmatize(doc, analyzer))
        except LemmaAlignmentError as exc:
            raise UserError(str(exc)) from exc
    for doc in lemmatized:
        save_lemma_sidecar(doc, lemma_out)
    word_types, lemma_types = vocab_stats(lemmatized)
    _write_json({"word_types": word_types, "lemma_types": lemma_types}, out / "vocab_stats.json")
    logger.info("lemmatized %d documents: %d word types, %d lemma types",
                len(lemmatized), word_types, lemma_types)


def cmd_reuse_boilerplate(cfg: PipelineConfig, args) -> None:
    corpus = _token_corpus(cfg, args)
    report = reuse.mark_boilerplate(
        corpus, cfg.passage_len, cfg.recurrence_threshold, workers=cfg.workers
    )
    out = _out(cfg)
    reuse.write_boilerplate_jsonl(report, out / "boilerplate.jsonl")
    _write_json(
        {
            "marked_tokens": report.marked_tokens,
            "total_tokens": report.total_tokens,
            "marked_fraction": report.marked_fraction,
            "passage_len": report.passage_len,
            "recurrence_threshold": report.recurrence_threshold,
        },
        out / "boilerplate_summary.json",
    )
    logger.info("marked %d of %d tokens (%.3f%%) as boilerplate",
                report.marked_tokens, report.total_tokens, 100 * report.marked_fraction)


def cmd_reuse_index(cfg: PipelineConfig, args) -> None:
    corpus = _token_corpus(cfg, args)
    out = _out(cfg)
    bp_path = out / "boilerplate.jsonl"
    if not bp_path.exists():
        raise UserError(
            f"missing prerequisite artifact {bp_path}: run reuse-boilerplate first"
        )
    masks = reuse.read_boilerplate_jsonl(bp_path)
    index = reuse.build_index(
        corpus, masks=masks, posting_cap=cfg.posting_cap, workers=cfg.workers
    )
    index.save(out)
    logger.info("indexed %d postings (%d keys dropped at cap %d)",
                index.total_postings, index.dropped_keys, index.posting_cap)


def cmd_reuse_match(cfg: PipelineConfig, args) -> None:
    out = _out(cfg)
    try:
        index = reuse.SkipGramIndex.load(out)
    except FileNotFoundError as exc:
        raise UserError(f"{exc}: run reuse-index first") from exc
    matches = reuse.find_matches(
        index, min_match_len=cfg.min_match_len, max_gap=cfg.max_gap, workers=cfg.workers
    )
    reuse.write_matches_jsonl(matches, out / "matches.jsonl")
    masked_fraction = None
    bp_summary = out / "boilerplate_summary.json"
    if bp_summary.exists():
        masked_fraction = json.loads(bp_summary.read_text(encoding="utf-8"))["marked_fraction"]
    summary = reuse.match_summary(matches, index, masked_fraction)
    summary.update({"min_match_len": cfg.min_match_len, "max_gap": cfg.max_gap})
    _write_json(summary, out / "summary.json")
    logger.info("found %d matches, mean length %.2f",
                summary["match_count"], summary["mean_match_length"])


def _dated_docs_for_training(cfg: PipelineConfig, args) -> list[Document]:
    docs = _load_documents(cfg, args)
    return [d for d in docs if d.meta.dating_status is DatingStatus.DATED]


def cmd_date_train(cfg: PipelineConfig, args) -> None:
    dated = _dated_docs_for_training(cfg, args)
    if not dated:
        raise UserError("no dated documents to train on")
    train, test = split_train_test(
        dated, cfg.train_fraction, cfg.seed, frozenset(cfg.exclude_genres)
    )
    if not train:
        raise UserError("training split is empty; add documents or lower train_fraction")
    models = train_period_models(
        train, _bins(cfg), cfg.lm_order, cfg.min_count,
        use_lemmas=cfg.dating_use_lemmas, workers=cfg.workers,
    )
    out = _out(cfg)
    save_period_models(models, out / "models")
    write_split_json(train, test, out / "split.json")
    logger.info("trained %d period models on %d documents (%d held out)",
                len(models), len(train), len(test))


def cmd_date_eval(cfg: PipelineConfig, args) -> None:
    out = _out(cfg)
    try:
        models = load_period_models(out / "models")
        _, test_ids = read_split_json(out / "split.json")
    except FileNotFoundError as exc:
        raise UserError(f"{exc}: run date-train first") from exc
    docs = {d.meta.doc_id: d for d in _load_documents(cfg, args)}
    missing = [doc_id for doc_id in test_ids if doc_id not in docs]
    if missing:
        raise UserError(f"test documents absent from corpus: {missing}")
    bins = [plm.bin for plm in models]
    rankings = []
    gold = {}
    for doc_id in test_ids:
        doc = docs[doc_id]
        if doc.meta.dod_hijri is None:
            raise UserError(f"{doc_id}: test document has no date")
        rankings.append(rank_dates(models, doc, use_lemmas=cfg.dating_use_lemmas))
        gold[doc_id] = assign_bin(doc.meta.dod_hijri, bins)
    report = evaluate(rankings, gold)
    write_eval_json(report, out / "eval.json")
    write_confusion_csv(report, out / "confusion.csv")
    logger.info("accuracy@1 = %.2f%% over %d test documents (random %.2f%%, majority %.2f%%)",
                report.accuracy_at_k[1], report.doc_count,
                report.random_baseline, report.majority_baseline)


def cmd_date_auto(cfg: PipelineConfig, args) -> None:
    docs = _load_documents(cfg, args)
    dated = [d for d in docs if d.meta.dating_status is DatingStatus.DATED]
    undated = [d for d in docs if d.meta.dating_status is DatingStatus.UNDATED]
    if not dated:
        raise UserError("no dated documents to train on")
    models = train_period_models(
        dated, _bins(cfg), cfg.lm_order, cfg.min_count,
        use_lemmas=cfg.dating_use_lemmas, workers=cfg.workers,
    )
    results = autodate(models, undated, top_n=cfg.top_n, use_lemmas=cfg.dating_use_lemmas)
    out = _out(cfg)
    write_autodate_jsonl(results, out / "autodate.jsonl")
    assigned = {r.doc_id: r.top_bin for r in results}
    updated = []
    for doc in docs:
        meta = doc.meta
        if meta.doc_id in assigned:
            top = assigned[meta.doc_id]
            meta = replace(
                meta,
                dod_hijri=(top.start_h + top.end_h) // 2,
                dod_ce=None,  # recomputed from the assigned year
                dating_status=DatingStatus.AUTO_DATED,
            )
        updated.append(meta)
    save_metadata(updated, out / "metadata_autodated.jsonl")
    logger.info("auto-dated %d documents with %d period models", len(results), len(models))


def cmd_lifespan(cfg: PipelineConfig, args) -> None:
    docs = _dated_only(_load_documents(cfg, args))
    try:
        records = analytics.compute_lifespans(
            docs,
            use_lemmas=not cfg.use_surfaces,
            include_autodated=cfg.include_autodated,
            min_frequency=cfg.min_lemma_frequency,
        )
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    out = _out(cfg)
    analytics.write_lifespans_csv(records, out / "lifespans.csv")
    analytics.write_lifespan_hist_csv(
        analytics.lifespan_histogram(records, cfg.lifespan_bucket_years),
        out / "lifespan_hist.csv",
    )
    if records:
        years = [r for rec in records for r in (rec.first_h, rec.last_h)]
        corpus_span = max(years) - min(years)
        if corpus_span > 0:
            stats = analytics.lifespan_stats(records, corpus_span)
            stats["corpus_span_years"] = corpus_span
            _write_json(stats, out / "lifespan_stats.json")
            logger.info("lifespans for %d lemmas: mean %.1f years (%.1f%% of span)",
                        len(records), stats["mean"], 100 * stats["mean_fraction_of_span"])
            return
    logger.info("lifespans for %d lemmas (no span statistics: corpus span is zero)",
                len(records))


def cmd_concord(cfg: PipelineConfig, args) -> None:
    docs = _dated_only(_load_documents(cfg, args))
    try:
        lines = analytics.concordance(
            docs,
            args.lemma,
            window=cfg.concord_window,
            use_lemmas=not cfg.use_surfaces,
            include_autodated=cfg.include_autodated,
        )
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    out = _out(cfg)
    analytics.write_concordance_csv(lines, out / "concordance.csv")
    logger.info("%d concordance lines for %r", len(lines), args.lemma)


def cmd_counts(cfg: PipelineConfig, args) -> None:
    docs = _dated_only(_load_documents(cfg, args))
    rows = analytics.counts_per_period(
        docs, cfg.bucket_years, include_autodated=cfg.include_autodated
    )
    out = _out(cfg)
    analytics.write_period_counts_csv(rows, out / "period_counts.csv")
    logger.info("period counts over %d buckets", len(rows))


def cmd_report(cfg: PipelineConfig, args) -> None:
    try:
        written = report_mod.render_report(cfg.output_dir)
    except FileNotFoundError as exc:
        raise UserError(str(exc)) from exc
    for path in written:
        logger.info("wrote %s", path)


_COMMANDS = {
    "ingest": cmd_ingest,
    "normalize": cmd_normalize,
    "lemmatize": cmd_lemmatize,
    "reuse-boilerplate": cmd_reuse_boilerplate,
    "reuse-index": cmd_reuse_index,
    "reuse-match": cmd_reuse_match,
    "date-train": cmd_date_train,
    "date-eval": cmd_date_eval,
    "date-auto": cmd_date_auto,
    "lifespan": cmd_lifespan,
    "concord": cmd_concord,
    "counts": cmd_counts,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UserError as exc:
        print(f"diacorpus: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
    )
    try:
        cfg = _effective_config(args)
        cfg.write_run_record(args.command)
        _COMMANDS[args.command](cfg, args)
        return 0
    except (UserError, ConfigError) as exc:
        print(f"diacorpus: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        logging.getLogger("diacorpus").exception("internal error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
