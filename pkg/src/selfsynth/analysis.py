"""Analysis protocols: label randomization, filter ablations, synthetic
in-context packing, conjunction-sensitivity sweeps, and label-distribution
comparisons."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Sequence

from .backends import GenerationBackend, GenerationRequest
from .filtering import FilterConfig, compute_length_stats, filter_inputs, filter_pairs
from .metrics import (
    EvalResult,
    evaluate_task,
    exact_match,
    irrelevant_ratio,
    l1_distance,
    label_distribution,
    round_percent,
)
from .prompts import ConjunctionVariant, render_chat_prompt
from .synthesis import annotate_outputs, generate_inputs
from .tasks import (
    Example,
    Provenance,
    StageCounts,
    SyntheticDataset,
    SynthesisParams,
    TaskSpec,
)


class AblationVariant(str, Enum):
    """One column of the filter-ablation comparison."""

    WITH_BOTH = "with_both"
    WITHOUT_NOISE = "without_noise"
    WITHOUT_LENGTH = "without_length"
    WITHOUT_BOTH = "without_both"

    def apply(self, config: FilterConfig) -> FilterConfig:
        return replace(
            config,
            enable_noise=self in (AblationVariant.WITH_BOTH, AblationVariant.WITHOUT_LENGTH),
            enable_length=self in (AblationVariant.WITH_BOTH, AblationVariant.WITHOUT_NOISE),
        )


def randomize_labels(
    dataset: SyntheticDataset, labels: Sequence[str], seed: int
) -> SyntheticDataset:
    """Replace every example output with a uniformly drawn label (seeded).

    Inputs and dataset size are untouched; provenance flips to randomized.
    Only meaningful for classification datasets, so an empty label set is an
    argument error.
    """
    if not labels:
        raise ValueError("label randomization needs a classification label set")
    rng = random.Random(seed)
    randomized = tuple(
        Example(input=ex.input, output=rng.choice(list(labels)), provenance=Provenance.RANDOMIZED)
        for ex in dataset.examples
    )
    return SyntheticDataset(
        task_id=dataset.task_id,
        examples=randomized,
        params=dataset.params,
        created_counts=dataset.created_counts,
    )


def randomize_demo_labels(task: TaskSpec, seed: int) -> TaskSpec:
    """Replace each demonstration output with a seeded uniform label draw."""
    if not task.is_classification:
        raise ValueError("demonstration-label randomization requires a classification task")
    rng = random.Random(seed)
    demos = tuple(
        Example(input=d.input, output=rng.choice(list(task.labels)), provenance=Provenance.RANDOMIZED)
        for d in task.demonstrations
    )
    return TaskSpec(
        id=task.id,
        instruction=task.instruction,
        kind=task.kind,
        demonstrations=demos,
        labels=task.labels,
    )


def build_self_icl_prompt(
    task: TaskSpec,
    dataset: SyntheticDataset,
    context_budget: int,
    query_input: str,
    variant: ConjunctionVariant = ConjunctionVariant.EQUALS_NEWLINE,
) -> tuple[str, int]:
    """Pack as many synthetic examples as fit into the prompt.

    Synthetic examples are appended after the seed demonstrations in dataset
    order until adding one more would push the prompt past ``context_budget``
    characters.  Returns the prompt and the number packed.
    """
    if not dataset.examples:
        raise ValueError("dataset must be non-empty")
    demos = list(task.demonstrations)
    prompt = render_chat_prompt(task.instruction, demos, query_input, variant)
    if len(prompt) > context_budget:
        raise ValueError(
            f"base prompt ({len(prompt)} chars) already exceeds the context "
            f"budget of {context_budget}"
        )
    k_used = 0
    for example in dataset.examples:
        candidate = render_chat_prompt(
            task.instruction, demos + [example], query_input, variant
        )
        if len(candidate) > context_budget:
            break
        demos.append(example)
        prompt = candidate
        k_used += 1
    return prompt, k_used


def chars_per_token_budget(token_budget: int, chars_per_token: float = 4.0) -> int:
    """Character budget for backends that expose no tokenizer."""
    return int(token_budget * chars_per_token)


@dataclass(frozen=True)
class AblationRun:
    """Shared raw generations plus one filtered dataset per variant."""

    raw_inputs: tuple[str, ...]
    annotated: tuple[Example, ...]
    datasets: Mapping[AblationVariant, SyntheticDataset]

    @property
    def raw_digest(self) -> str:
        payload = json.dumps(
            {
                "inputs": list(self.raw_inputs),
                "annotated": [ex.to_dict() for ex in self.annotated],
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def run_filter_ablation(
    task: TaskSpec,
    params: SynthesisParams,
    backend: GenerationBackend,
    variants: Sequence[AblationVariant],
    filter_config: FilterConfig,
) -> AblationRun:
    """Re-apply filters per variant over one shared set of raw generations.

    Inputs are generated and annotated exactly once (annotation covers every
    raw input so disabled-filter variants have pairs to keep); the variants
    then differ only in which filters run.
    """
    if not variants:
        raise ValueError("need at least one ablation variant")
    _, repository = generate_inputs(task, params, backend)
    raw_inputs = tuple(repository.entries)
    examples, _ = annotate_outputs(task, list(raw_inputs), params, backend)
    annotation = {ex.input: ex for ex in examples}
    stats = compute_length_stats(task.demonstrations)

    datasets: dict[AblationVariant, SyntheticDataset] = {}
    for variant in variants:
        config = variant.apply(filter_config)
        kept_inputs, _ = filter_inputs(list(raw_inputs), stats, config)
        pairs = [annotation[text] for text in kept_inputs if text in annotation]
        kept_pairs, _ = filter_pairs(pairs, stats, config)
        datasets[variant] = SyntheticDataset(
            task_id=task.id,
            examples=tuple(kept_pairs),
            params=params,
            created_counts=StageCounts(
                raw_inputs=len(raw_inputs),
                post_input_filter=len(kept_inputs),
                post_pair_filter=len(kept_pairs),
            ),
        )
    return AblationRun(raw_inputs=raw_inputs, annotated=tuple(examples), datasets=datasets)


@dataclass(frozen=True)
class SweepResult:
    """Per-variant scores for one task plus the max-min spread."""

    task_id: str
    results: Mapping[ConjunctionVariant, EvalResult]

    @property
    def scores(self) -> dict[ConjunctionVariant, float]:
        return {v: r.percent for v, r in self.results.items()}

    @property
    def diff(self) -> float:
        return sweep_diff(self.scores.values())


def sweep_diff(scores: Sequence[float]) -> float:
    """Spread of a sensitivity row: max score minus min score, one decimal."""
    values = list(scores)
    return round_percent(max(values) - min(values))


def prompt_sensitivity_sweep(
    task: TaskSpec,
    backend: GenerationBackend,
    variants: Sequence[ConjunctionVariant],
    eval_instances: Sequence[tuple[str, str]],
    max_new_tokens: int = 128,
) -> SweepResult:
    """Evaluate the same instances under each conjunction variant.

    Decoding is greedy; only the demonstration-turn conjunction changes
    between variants.
    """
    if len(variants) < 2:
        raise ValueError("sensitivity sweep needs at least two variants")
    if not eval_instances:
        raise ValueError("eval_instances must be non-empty")
    results: dict[ConjunctionVariant, EvalResult] = {}
    for variant in variants:
        requests = [
            GenerationRequest(
                prompt=render_chat_prompt(task.instruction, task.demonstrations, text, variant),
                temperature=0.0,
                max_new_tokens=max_new_tokens,
                stop_sequences=("USER",),
            )
            for text, _ in eval_instances
        ]
        predictions = [r.text.strip() for r in backend.batch_generate(requests)]
        golds = [gold for _, gold in eval_instances]
        results[variant] = evaluate_task(task, predictions, golds)
    return SweepResult(task_id=task.id, results=results)


@dataclass(frozen=True)
class DistributionRow:
    """One comparison row: accuracy, L1 distance, and irrelevant ratio for
    the baseline and the tuned system."""

    task_id: str
    accuracy_baseline: float
    accuracy_tuned: float
    l1_baseline: float
    l1_tuned: float
    irrelevant_baseline: float
    irrelevant_tuned: float

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "accuracy_baseline": self.accuracy_baseline,
            "accuracy_tuned": self.accuracy_tuned,
            "l1_baseline": self.l1_baseline,
            "l1_tuned": self.l1_tuned,
            "irrelevant_baseline": self.irrelevant_baseline,
            "irrelevant_tuned": self.irrelevant_tuned,
        }


def distribution_report(
    task: TaskSpec,
    baseline_outputs: Sequence[str],
    tuned_outputs: Sequence[str],
    gold_outputs: Sequence[str],
) -> DistributionRow:
    """Compare both systems' output distributions against the gold labels."""
    if not task.is_classification:
        raise ValueError("distribution report requires a classification task")
    if not len(baseline_outputs) == len(tuned_outputs) == len(gold_outputs):
        raise ValueError(
            "output lists must have equal lengths, got "
            f"{len(baseline_outputs)}/{len(tuned_outputs)}/{len(gold_outputs)}"
        )
    gold_dist = label_distribution(gold_outputs, task.labels)
    base_dist = label_distribution(baseline_outputs, task.labels)
    tuned_dist = label_distribution(tuned_outputs, task.labels)

    def accuracy(predictions: Sequence[str]) -> float:
        return sum(exact_match(p, g) for p, g in zip(predictions, gold_outputs)) / len(
            gold_outputs
        )

    return DistributionRow(
        task_id=task.id,
        accuracy_baseline=accuracy(baseline_outputs),
        accuracy_tuned=accuracy(tuned_outputs),
        l1_baseline=l1_distance(base_dist, gold_dist),
        l1_tuned=l1_distance(tuned_dist, gold_dist),
        irrelevant_baseline=irrelevant_ratio(base_dist),
        irrelevant_tuned=irrelevant_ratio(tuned_dist),
    )
