"""Render figures and a summary report from pipeline artifacts.

Whatever delimited outputs exist in the output directory get a matching
figure: period counts, lifespan distribution, the dating confusion matrix,
and the accuracy-at-k curve.  The report footer carries documented reference
values from published full-corpus studies for side-by-side comparison.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Published reference values for word-lifespan statistics, quoted for the
# report footer: a full-scale historical Arabic corpus versus the Corpus of
# Historical American English (COHA).
REFERENCE_LIFESPANS = {
    "arabic_full_corpus": {
        "mean_years": 1124,
        "sd_years": 338,
        "median_years": 1222,
        "fraction_of_span": 0.83,
    },
    "english_coha": {
        "mean_years": 68,
        "sd_years": 58,
        "median_years": 60,
        "fraction_of_span": 0.36,
    },
}

_FIG_DPI = 150


def _read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def render_period_counts(csv_path: Path, fig_path: Path) -> None:
    rows = _read_csv(csv_path)
    starts = [int(r["period_start"]) for r in rows]
    words = [int(r["word_count"]) for r in rows]
    texts = [int(r["text_count"]) for r in rows]
    fig, ax_words = plt.subplots(figsize=(8, 4.5))
    width = (starts[1] - starts[0]) * 0.8 if len(starts) > 1 else 40
    ax_words.bar(starts, words, width=width, color="#4878a8", label="words")
    ax_words.set_xlabel("period start (Hijri year)")
    ax_words.set_ylabel("word count")
    ax_texts = ax_words.twinx()
    ax_texts.plot(starts, texts, color="#b0413e", marker="o", label="texts")
    ax_texts.set_ylabel("text count")
    ax_words.set_title("Word and text counts per period")
    fig.tight_layout()
    fig.savefig(fig_path, dpi=_FIG_DPI)
    plt.close(fig)


def render_lifespan_hist(csv_path: Path, fig_path: Path) -> None:
    rows = _read_csv(csv_path)
    starts = [int(r["span_start"]) for r in rows]
    counts = [int(r["lemma_count"]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = (starts[1] - starts[0]) * 0.9 if len(starts) > 1 else 80
    ax.bar(starts, counts, width=width, color="#4878a8", align="edge")
    ax.set_xlabel("lifespan (years)")
    ax.set_ylabel("lemma count")
    ax.set_title("Distribution of word lifespans")
    fig.tight_layout()
    fig.savefig(fig_path, dpi=_FIG_DPI)
    plt.close(fig)


def render_confusion(csv_path: Path, fig_path: Path) -> None:
    with csv_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = header[1:]
        matrix = np.array([[int(v) for v in row[1:]] for row in reader])
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=90, fontsize=7)
    ax.set_yticks(range(len(labels)), labels, fontsize=7)
    ax.set_xlabel("predicted period")
    ax.set_ylabel("true period")
    ax.set_title("Text dating confusion matrix")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=_FIG_DPI)
    plt.close(fig)


def render_accuracy(eval_path: Path, fig_path: Path) -> None:
    data = json.loads(eval_path.read_text(encoding="utf-8"))
    ks = sorted(int(k) for k in data["accuracy_at_k"])
    accuracy = [data["accuracy_at_k"][str(k)] for k in ks]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(ks, accuracy, marker="o", color="#4878a8", label="accuracy@k")
    ax.axhline(data["random_baseline"], color="#999999", linestyle="--", label="random")
    ax.axhline(data["majority_baseline"], color="#b0413e", linestyle=":", label="majority")
    ax.set_xlabel("k")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Dating accuracy at top-k")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=_FIG_DPI)
    plt.close(fig)


_RENDERERS = [
    ("period_counts.csv", "fig_period_counts.png", render_period_counts),
    ("lifespan_hist.csv", "fig_lifespan_hist.png", render_lifespan_hist),
    ("confusion.csv", "fig_confusion.png", render_confusion),
    ("eval.json", "fig_accuracy.png", render_accuracy),
]


def render_report(output_dir: Path | str) -> list[Path]:
    """Render a figure for every known artifact present, plus report.md.

    Returns the list of files written; raises FileNotFoundError when no
    renderable artifact exists.
    """
    output_dir = Path(output_dir)
    written: list[Path] = []
    sections: list[str] = []
    for artifact_name, fig_name, renderer in _RENDERERS:
        artifact = output_dir / artifact_name
        if not artifact.exists():
            continue
        fig_path = output_dir / fig_name
        renderer(artifact, fig_path)
        written.append(fig_path)
        sections.append(f"- `{artifact_name}` -> ![{fig_name}]({fig_name})")
    if not written:
        raise FileNotFoundError(
            f"no renderable artifacts in {output_dir} "
            "(expected any of: " + ", ".join(name for name, _, _ in _RENDERERS) + ")"
        )
    lines = ["# Corpus report", ""]
    lines.extend(sections)
    stats_path = output_dir / "lifespan_stats.json"
    if stats_path.exists():
        stats = json.loads(stats_path.read_text(encoding="utf-8"))
        lines += [
            "",
            "## Lifespan statistics",
            "",
            f"- mean: {stats['mean']:.1f} years",
            f"- sd: {stats['sd']:.1f} years",
            f"- median: {stats['median']:.1f} years",
            f"- mean / corpus span: {stats['mean_fraction_of_span']:.2%}",
        ]
    lines += [
        "",
        "## Reference values (published full-corpus studies)",
        "",
        "| corpus | mean | SD | median | share of span |",
        "|---|---|---|---|---|",
    ]
    for name, ref in REFERENCE_LIFESPANS.items():
        lines.append(
            f"| {name} | {ref['mean_years']} y | {ref['sd_years']} y "
            f"| {ref['median_years']} y | {ref['fraction_of_span']:.0%} |"
        )
    report_path = output_dir / "report.md"
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(report_path)
    return written
