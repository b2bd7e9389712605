"""Pipeline configuration: one serializable object drives every stage.

All randomness (the train/test split) flows from the single seed, and the
effective configuration is echoed to ``run.json`` so a run can be reproduced
from its output directory alone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    corpus_dir: str = "corpus"
    output_dir: str = "out"
    workers: int = 1
    seed: int = 0
    # ingest
    title_author_threshold: float = 0.2
    body_threshold: float = 0.8
    shingle_size: int = 5
    # reuse
    passage_len: int = 6
    recurrence_threshold: int = 40
    posting_cap: int = 1000
    min_match_len: int = 20
    max_gap: int = 10
    reuse_use_lemmas: bool = False
    # dating
    lm_order: int = 5
    min_count: int = 2
    train_fraction: float = 0.8
    exclude_genres: list[str] = field(default_factory=lambda: ["dictionary"])
    bins: list[list[int]] | None = None  # [[start_h, end_h], ...]; None = default 14
    top_n: int = 3
    dating_use_lemmas: bool = False
    # analytics
    concord_window: int = 5
    bucket_years: int = 50
    lifespan_bucket_years: int = 100
    min_lemma_frequency: int = 0
    include_autodated: bool = False
    use_surfaces: bool = False

    def validate(self) -> None:
        positive = {
            "workers": self.workers,
            "shingle_size": self.shingle_size,
            "passage_len": self.passage_len,
            "posting_cap": self.posting_cap,
            "min_match_len": self.min_match_len,
            "lm_order": self.lm_order,
            "min_count": self.min_count,
            "top_n": self.top_n,
            "concord_window": self.concord_window,
            "bucket_years": self.bucket_years,
            "lifespan_bucket_years": self.lifespan_bucket_years,
        }
        for name, value in positive.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if self.recurrence_threshold < 2:
            raise ConfigError(f"recurrence_threshold must be >= 2, got {self.recurrence_threshold}")
        if self.max_gap < 0:
            raise ConfigError(f"max_gap must be >= 0, got {self.max_gap}")
        if self.min_lemma_frequency < 0:
            raise ConfigError(f"min_lemma_frequency must be >= 0, got {self.min_lemma_frequency}")
        if not 0.0 < self.title_author_threshold < 1.0:
            raise ConfigError("title_author_threshold must be in (0, 1)")
        if not 0.0 < self.body_threshold <= 1.0:
            raise ConfigError("body_threshold must be in (0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        if self.bins is not None:
            for entry in self.bins:
                if len(entry) != 2 or entry[0] > entry[1]:
                    raise ConfigError(f"malformed bin {entry!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: Path | str) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def write_run_record(self, subcommand: str) -> Path:
        """Echo the effective configuration into <output_dir>/run.json."""
        out = Path(self.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        record = {"subcommand": subcommand, "config": self.to_dict()}
        path = out / "run.json"
        path.write_text(
            json.dumps(record, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return path
