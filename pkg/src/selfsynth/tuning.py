"""Random-search hyperparameter tuning under a worst-task objective.

A candidate parameter point is scored by its minimum per-task improvement
over the in-context-learning baseline; the search keeps the point whose worst
task improves the most.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .tasks import SynthesisParams, TaskKind, TaskSpec

logger = logging.getLogger(__name__)

_REDRAW_LIMIT = 1000


@dataclass(frozen=True)
class ParamSpace:
    """Searchable ranges; intervals sample uniformly, lists choose uniformly."""

    input_temperature_range: tuple[float, float] = (0.7, 1.3)
    output_temperature_range: tuple[float, float] = (0.0, 0.3)
    n_raw_inputs_choices: tuple[int, ...] = (20, 40, 60)
    repo_sample_size_choices: tuple[int, ...] = (0, 1, 3)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_raw_inputs_choices", tuple(self.n_raw_inputs_choices))
        object.__setattr__(
            self, "repo_sample_size_choices", tuple(self.repo_sample_size_choices)
        )
        for lo, hi in (self.input_temperature_range, self.output_temperature_range):
            if hi < lo:
                raise ValueError(f"empty interval ({lo}, {hi})")
        if not self.n_raw_inputs_choices or not self.repo_sample_size_choices:
            raise ValueError("choice lists must be non-empty")

    def draw(self, rng: random.Random, base: SynthesisParams) -> SynthesisParams:
        """One uniform sample; the input >= output temperature constraint is
        enforced by redrawing the pair."""
        for _ in range(_REDRAW_LIMIT):
            input_t = rng.uniform(*self.input_temperature_range)
            output_t = rng.uniform(*self.output_temperature_range)
            if input_t >= output_t:
                return SynthesisParams(
                    n_raw_inputs=rng.choice(self.n_raw_inputs_choices),
                    input_temperature=input_t,
                    output_temperature=output_t,
                    repo_sample_size=rng.choice(self.repo_sample_size_choices),
                    max_new_tokens_input=base.max_new_tokens_input,
                    max_new_tokens_output=base.max_new_tokens_output,
                    rng_seed=base.rng_seed,
                )
        raise ValueError(
            "could not draw input_temperature >= output_temperature from "
            f"{self.input_temperature_range} / {self.output_temperature_range}"
        )

    def to_dict(self) -> dict:
        return {
            "input_temperature_range": list(self.input_temperature_range),
            "output_temperature_range": list(self.output_temperature_range),
            "n_raw_inputs_choices": list(self.n_raw_inputs_choices),
            "repo_sample_size_choices": list(self.repo_sample_size_choices),
        }


@dataclass(frozen=True)
class TrialRecord:
    params: SynthesisParams
    per_task_delta: Mapping[str, float]
    trial_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_task_delta", dict(self.per_task_delta))

    @property
    def objective(self) -> float:
        return objective(self.per_task_delta)

    def to_dict(self) -> dict:
        deltas = {
            k: (v if math.isfinite(v) else "-inf") for k, v in self.per_task_delta.items()
        }
        return {
            "trial_index": self.trial_index,
            "params": self.params.to_dict(),
            "per_task_delta": deltas,
            "objective": self.objective if math.isfinite(self.objective) else "-inf",
        }


def objective(per_task_delta: Mapping[str, float]) -> float:
    """Worst-task improvement: the minimum delta across tasks."""
    if not per_task_delta:
        raise ValueError("per_task_delta must be non-empty")
    return min(per_task_delta.values())


def random_search(
    tasks: Sequence[TaskSpec],
    baseline_scores: Mapping[str, float],
    space: ParamSpace,
    trials: int,
    seed: int,
    evaluate: Callable[[SynthesisParams, TaskSpec], float],
    base_params: SynthesisParams | None = None,
) -> tuple[TrialRecord, list[TrialRecord]]:
    """Seeded uniform search maximizing the worst-task objective.

    An ``evaluate`` failure records that task's delta as -inf so the trial can
    never win against any clean trial; ties break toward the earliest trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not tasks:
        raise ValueError("tasks must be non-empty")
    missing = [t.id for t in tasks if t.id not in baseline_scores]
    if missing:
        raise ValueError(f"baseline_scores missing tasks: {missing}")

    base = base_params or SynthesisParams()
    rng = random.Random(seed)
    records: list[TrialRecord] = []
    best: TrialRecord | None = None
    for index in range(trials):
        params = space.draw(rng, base)
        deltas: dict[str, float] = {}
        for task in tasks:
            try:
                score = evaluate(params, task)
            except Exception as exc:
                logger.warning(
                    "trial %d: evaluate failed for task %s: %s", index, task.id, exc
                )
                deltas[task.id] = float("-inf")
                continue
            deltas[task.id] = score - baseline_scores[task.id]
        record = TrialRecord(params=params, per_task_delta=deltas, trial_index=index)
        records.append(record)
        if best is None or record.objective > best.objective:
            best = record
    assert best is not None
    return best, records


def split_tune_holdout(
    tasks: Sequence[TaskSpec], seed: int
) -> tuple[list[TaskSpec], list[TaskSpec]]:
    """Seeded random halving of the task list, per task kind.

    The first half of each kind tunes parameters, the second half is held out
    for evaluation; with an odd count the tune side gets the extra task.
    """
    rng = random.Random(seed)
    tune: list[TaskSpec] = []
    holdout: list[TaskSpec] = []
    for kind in (TaskKind.CLASSIFICATION, TaskKind.GENERATION):
        group = [t for t in tasks if t.kind is kind]
        rng.shuffle(group)
        half = (len(group) + 1) // 2
        tune.extend(group[:half])
        holdout.extend(group[half:])
    return tune, holdout
