"""Report assembly: score summaries, distribution and ablation tables, and
sensitivity rows, written as CSV and JSON with matplotlib figures rendered
alongside."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import DistributionRow, SweepResult
from .metrics import EvalResult, round_percent
from .prompts import ConjunctionVariant
from .tasks import TaskKind


@dataclass(frozen=True)
class ScoreRow:
    """Per-task scores for the baseline and the tuned system, in percent."""

    task_id: str
    kind: TaskKind
    baseline: float
    tuned: float

    @property
    def delta(self) -> float:
        return round_percent(self.tuned - self.baseline)


@dataclass(frozen=True)
class ScoreSummary:
    rows: tuple[ScoreRow, ...]
    averages: Mapping[str, Mapping[str, float]]


def assemble_score_summary(rows: Sequence[ScoreRow]) -> ScoreSummary:
    """Per-kind macro averages and deltas over the given task rows."""
    if not rows:
        raise ValueError("need at least one score row")
    averages: dict[str, dict[str, float]] = {}
    for kind in (TaskKind.CLASSIFICATION, TaskKind.GENERATION):
        group = [r for r in rows if r.kind is kind]
        if not group:
            continue
        baseline_mean = sum(r.baseline for r in group) / len(group)
        tuned_mean = sum(r.tuned for r in group) / len(group)
        averages[kind.value] = {
            "baseline": round_percent(baseline_mean),
            "tuned": round_percent(tuned_mean),
            # delta averages the per-task deltas (rounding only at the end)
            "delta": round_percent(tuned_mean - baseline_mean),
            "n_tasks": len(group),
        }
    return ScoreSummary(rows=tuple(rows), averages=averages)


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_csv(path: str | Path, fieldnames: Sequence[str], rows: Sequence[Mapping]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_json(path: str | Path, payload) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def write_score_report(
    summary: ScoreSummary,
    output_dir: str | Path,
    manifest_hash: str = "",
    stem: str = "scores",
    figures: bool = True,
) -> dict[str, Path]:
    """Write the main comparison table as CSV/JSON plus a grouped-bar figure."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    fieldnames = ["task_id", "kind", "baseline", "tuned", "delta", "manifest_hash"]
    table = [
        {
            "task_id": r.task_id,
            "kind": r.kind.value,
            "baseline": r.baseline,
            "tuned": r.tuned,
            "delta": r.delta,
            "manifest_hash": manifest_hash,
        }
        for r in summary.rows
    ]
    for kind, avg in summary.averages.items():
        table.append(
            {
                "task_id": f"avg_{kind}",
                "kind": kind,
                "baseline": avg["baseline"],
                "tuned": avg["tuned"],
                "delta": avg["delta"],
                "manifest_hash": manifest_hash,
            }
        )
    paths = {
        "csv": output_dir / f"{stem}.csv",
        "json": output_dir / f"{stem}.json",
    }
    write_csv(paths["csv"], fieldnames, table)
    write_json(
        paths["json"],
        {"rows": table, "averages": {k: dict(v) for k, v in summary.averages.items()}},
    )
    if figures:
        paths["figure"] = output_dir / f"{stem}.png"
        _grouped_bars(
            paths["figure"],
            [r.task_id for r in summary.rows],
            {
                "baseline": [r.baseline for r in summary.rows],
                "tuned": [r.tuned for r in summary.rows],
            },
            title="Task scores: baseline vs tuned",
            ylabel="score (%)",
        )
    return paths


def write_distribution_report(
    rows: Sequence[DistributionRow],
    output_dir: str | Path,
    manifest_hash: str = "",
    stem: str = "distribution",
    figures: bool = True,
) -> dict[str, Path]:
    """Accuracy / L1 / irrelevant-ratio comparison table plus figure."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    fieldnames = [
        "task_id",
        "accuracy_baseline",
        "accuracy_tuned",
        "l1_baseline",
        "l1_tuned",
        "irrelevant_baseline",
        "irrelevant_tuned",
        "manifest_hash",
    ]
    table = []
    for row in rows:
        record = {k: round(v, 2) if isinstance(v, float) else v for k, v in row.to_dict().items()}
        record["manifest_hash"] = manifest_hash
        table.append(record)
    if rows:
        avg = {
            "task_id": "avg",
            "manifest_hash": manifest_hash,
        }
        for column in fieldnames[1:-1]:
            avg[column] = round(sum(getattr(r, column) for r in rows) / len(rows), 2)
        table.append(avg)
    paths = {
        "csv": output_dir / f"{stem}.csv",
        "json": output_dir / f"{stem}.json",
    }
    write_csv(paths["csv"], fieldnames, table)
    write_json(paths["json"], {"rows": table})
    if figures and rows:
        paths["figure"] = output_dir / f"{stem}.png"
        _grouped_bars(
            paths["figure"],
            [r.task_id for r in rows],
            {
                "irrelevant (baseline)": [r.irrelevant_baseline for r in rows],
                "irrelevant (tuned)": [r.irrelevant_tuned for r in rows],
            },
            title="Irrelevant-output ratio",
            ylabel="ratio",
        )
    return paths


def write_sensitivity_report(
    results: Sequence[SweepResult] | Sequence[Mapping],
    output_dir: str | Path,
    manifest_hash: str = "",
    stem: str = "sensitivity",
    figures: bool = True,
) -> dict[str, Path]:
    """Conjunction-sensitivity table: one column per variant plus the spread.

    Accepts live sweep results or pre-computed rows shaped like
    ``{"task_id": ..., "scores": {"equals-newline": 27.0, ...}}``.
    """
    variant_names = [v.cli_name for v in ConjunctionVariant]
    table = []
    for entry in results:
        if isinstance(entry, SweepResult):
            scores = {v.cli_name: s for v, s in entry.scores.items()}
            task_id = entry.task_id
        else:
            scores = dict(entry["scores"])
            task_id = entry["task_id"]
        present = [scores[name] for name in variant_names if name in scores]
        row = {"task_id": task_id, "manifest_hash": manifest_hash}
        for name in variant_names:
            row[name] = scores.get(name, "")
        row["diff"] = round_percent(max(present) - min(present))
        table.append(row)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    fieldnames = ["task_id", *variant_names, "diff", "manifest_hash"]
    paths = {
        "csv": output_dir / f"{stem}.csv",
        "json": output_dir / f"{stem}.json",
    }
    write_csv(paths["csv"], fieldnames, table)
    write_json(paths["json"], {"rows": table})
    if figures and table:
        paths["figure"] = output_dir / f"{stem}.png"
        _grouped_bars(
            paths["figure"],
            [row["task_id"] for row in table],
            {
                name: [row[name] if row[name] != "" else 0.0 for row in table]
                for name in variant_names
            },
            title="Prompt-conjunction sensitivity",
            ylabel="score (%)",
        )
    return paths


def write_ablation_report(
    rows: Sequence[Mapping],
    output_dir: str | Path,
    manifest_hash: str = "",
    stem: str = "ablation",
    figures: bool = True,
) -> dict[str, Path]:
    """Filter-ablation table: per-variant kept counts (and scores if given)."""
    variant_names = ["without_both", "without_noise", "without_length", "with_both"]
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    fieldnames = ["task_id", "measure", *variant_names, "manifest_hash"]
    table = [dict(row, manifest_hash=manifest_hash) for row in rows]
    paths = {
        "csv": output_dir / f"{stem}.csv",
        "json": output_dir / f"{stem}.json",
    }
    write_csv(paths["csv"], fieldnames, table)
    write_json(paths["json"], {"rows": table})
    if figures and table:
        paths["figure"] = output_dir / f"{stem}.png"
        _grouped_bars(
            paths["figure"],
            [f"{row['task_id']}:{row['measure']}" for row in table],
            {name: [float(row[name]) for row in table] for name in variant_names},
            title="Filter ablation",
            ylabel="value",
        )
    return paths


def write_eval_report(
    result: EvalResult,
    path: str | Path,
    include_per_instance: bool = False,
    manifest_hash: str = "",
) -> None:
    record = result.to_dict(include_per_instance=include_per_instance)
    if manifest_hash:
        record["manifest_hash"] = manifest_hash
    write_json(path, record)


def _grouped_bars(
    path: Path,
    categories: Sequence[str],
    series: Mapping[str, Sequence[float]],
    title: str,
    ylabel: str,
) -> None:
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(categories)), 4.0))
    width = 0.8 / max(1, len(series))
    for i, (label, values) in enumerate(series.items()):
        offsets = [x + i * width for x in range(len(categories))]
        ax.bar(offsets, list(values), width=width, label=label)
    ax.set_xticks([x + 0.4 - width / 2 for x in range(len(categories))])
    ax.set_xticklabels(categories, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
