"""Evaluation metrics: exact match, LCS-based ROUGE-L, and label-distribution
diagnostics (L1 distance, irrelevant ratio)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Mapping, Sequence

from .tasks import TaskSpec, normalize_output

IRRELEVANT = "<irrelevant>"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class MetricKind(str, Enum):
    EXACT_MATCH = "exact_match"
    ROUGE_L = "rouge_l"


def tokenize(text: str) -> list[str]:
    """Casefold and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.casefold())


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest-common-subsequence length via DP in O(len(a)*len(b)) time and
    O(min(len(a), len(b))) space."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str, beta: float = 1.0) -> float:
    """LCS F-measure between candidate and reference token sequences.

    ``beta`` weights recall (1.0 gives the balanced F1 default).
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    b2 = beta * beta
    return (1 + b2) * precision * recall / (recall + b2 * precision)


def exact_match(prediction: str, gold: str, normalize=normalize_output) -> int:
    """1 iff the two strings are equal under ``normalize`` (default: trim
    surrounding whitespace and casefold)."""
    return int(normalize(prediction) == normalize(gold))


@dataclass(frozen=True)
class LabelDistribution:
    """Probability mass over the task labels plus an irrelevant bucket."""

    mass: Mapping[str, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mass", dict(self.mass))
        if any(v < 0 for v in self.mass.values()):
            raise ValueError("masses must be non-negative")
        total = sum(self.mass.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1, got {total}")
        if IRRELEVANT not in self.mass:
            raise ValueError("distribution must include the irrelevant bucket")

    def __getitem__(self, key: str) -> float:
        return self.mass[key]


def label_distribution(outputs: Sequence[str], labels: Sequence[str]) -> LabelDistribution:
    """Frequency of each label among outputs; off-label outputs count as
    irrelevant."""
    if not outputs:
        raise ValueError("outputs must be non-empty")
    if not labels:
        raise ValueError("labels must be non-empty")
    canonical = {normalize_output(label): label for label in labels}
    counts = {label: 0 for label in labels}
    counts[IRRELEVANT] = 0
    for output in outputs:
        key = canonical.get(normalize_output(output), IRRELEVANT)
        counts[key] += 1
    n = len(outputs)
    return LabelDistribution({k: v / n for k, v in counts.items()})


def l1_distance(p: LabelDistribution, q: LabelDistribution) -> float:
    """Sum of absolute per-key mass differences; requires identical key sets."""
    if set(p.mass) != set(q.mass):
        raise ValueError(
            f"key sets differ: {sorted(p.mass)} vs {sorted(q.mass)}"
        )
    return sum(abs(p.mass[k] - q.mass[k]) for k in p.mass)


def irrelevant_ratio(d: LabelDistribution) -> float:
    return d.mass[IRRELEVANT]


@dataclass(frozen=True)
class EvalResult:
    task_id: str
    per_instance_scores: tuple[float, ...]
    metric_kind: MetricKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_instance_scores", tuple(self.per_instance_scores))
        if not self.per_instance_scores:
            raise ValueError("need at least one score")

    @property
    def aggregate(self) -> float:
        """Arithmetic mean of per-instance scores, in [0, 1]."""
        return sum(self.per_instance_scores) / len(self.per_instance_scores)

    @property
    def percent(self) -> float:
        """Aggregate in table form: percent rounded to one decimal."""
        return round_percent(self.aggregate * 100.0)

    def to_dict(self, include_per_instance: bool = False) -> dict:
        record = {
            "task_id": self.task_id,
            "metric": self.metric_kind.value,
            "aggregate": self.percent,
            "n": len(self.per_instance_scores),
        }
        if include_per_instance:
            record["per_instance"] = list(self.per_instance_scores)
        return record


def round_percent(value: float) -> float:
    """One-decimal half-up rounding, immune to binary-float ties."""
    return float(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def evaluate_task(
    task: TaskSpec, predictions: Sequence[str], golds: Sequence[str]
) -> EvalResult:
    """Score predictions against golds with the task's metric: exact match for
    classification, ROUGE-L for generation."""
    if len(predictions) != len(golds):
        raise ValueError(
            f"predictions/golds length mismatch: {len(predictions)} vs {len(golds)}"
        )
    if not predictions:
        raise ValueError("need at least one prediction")
    if task.is_classification:
        scores = [float(exact_match(p, g)) for p, g in zip(predictions, golds)]
        kind = MetricKind.EXACT_MATCH
    else:
        scores = [rouge_l(p, g) for p, g in zip(predictions, golds)]
        kind = MetricKind.ROUGE_L
    return EvalResult(task_id=task.id, per_instance_scores=tuple(scores), metric_kind=kind)
