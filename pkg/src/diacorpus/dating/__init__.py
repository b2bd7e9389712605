"""Perplexity-based text dating with per-period n-gram language models."""

from .arpa import read_arpa, write_arpa
from .ngram_lm import (
    BOS,
    EOS,
    KNESER_NEY,
    MLE,
    UNK,
    NgramLanguageModel,
    perplexity,
    train_lm,
)
from .pipeline import (
    AutoDateResult,
    DateRanking,
    EvalReport,
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
    validate_bins,
    write_autodate_jsonl,
    write_confusion_csv,
    write_eval_json,
    write_split_json,
)

__all__ = [
    "BOS",
    "EOS",
    "KNESER_NEY",
    "MLE",
    "UNK",
    "AutoDateResult",
    "DateRanking",
    "EvalReport",
    "NgramLanguageModel",
    "PeriodBin",
    "PeriodLanguageModel",
    "assign_bin",
    "autodate",
    "default_bins",
    "evaluate",
    "load_period_models",
    "perplexity",
    "rank_dates",
    "read_arpa",
    "read_split_json",
    "save_period_models",
    "split_train_test",
    "train_lm",
    "train_period_models",
    "validate_bins",
    "write_arpa",
    "write_autodate_jsonl",
    "write_confusion_csv",
    "write_eval_json",
    "write_split_json",
]
