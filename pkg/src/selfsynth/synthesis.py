"""The staged generate -> filter -> annotate -> filter pipeline.

Input generation runs as a single phase of many prompting calls against a
growing deduplicated repository (classification prompts are conditioned on a
uniformly drawn label so the requested-label distribution stays balanced);
annotation then labels every surviving input in context.  Fully deterministic
under the mock backend for a fixed seed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .backends import FinishReason, GenerationBackend, GenerationRequest
from .filtering import (
    FilterConfig,
    Rejection,
    compute_length_stats,
    filter_inputs,
    filter_pairs,
)
from .prompts import (
    DEFAULT_TEMPLATES,
    TemplateSet,
    render_annotation_prompt,
    render_input_prompt,
)
from .tasks import Example, Provenance, StageCounts, SyntheticDataset, SynthesisParams, TaskSpec

logger = logging.getLogger(__name__)

# Bounds total backend calls when the model collapses to duplicates.
ATTEMPT_BUDGET_FACTOR = 3

ANNOTATION_STOP_SEQUENCES = ("USER",)


class InputParseError(ValueError):
    """Raised when a raw model response yields no usable input."""


class EmptyDatasetError(RuntimeError):
    """Raised when a pipeline stage eliminates every candidate example."""

    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        message = f"no examples survived the {stage} stage"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


@dataclass
class InputRepository:
    """Append-only, insertion-ordered pool of distinct generated inputs."""

    entries: list[str] = field(default_factory=list)
    _seen: set[str] = field(default_factory=set, repr=False)

    def add(self, text: str) -> bool:
        if text in self._seen:
            return False
        self._seen.add(text)
        self.entries.append(text)
        return True

    def sample(self, k: int, rng: random.Random) -> list[str]:
        k = min(k, len(self.entries))
        if k == 0:
            return []
        return rng.sample(self.entries, k)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, text: str) -> bool:
        return text in self._seen


def parse_generated_input(raw: str) -> str:
    """Extract the bare input from a model response.

    Strips a leading "[input]=" marker, surrounding whitespace, and matching
    surrounding quote pairs; an empty remainder is a parse rejection.
    """
    text = raw.strip()
    if text.startswith("[input]="):
        text = text[len("[input]="):].strip()
    while len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    if not text:
        raise InputParseError(f"no input found in response {raw!r}")
    return text


def generate_inputs(
    task: TaskSpec,
    params: SynthesisParams,
    backend: GenerationBackend,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> tuple[list[tuple[str, str | None]], InputRepository]:
    """Single round of input generation.

    Prompts the backend one input at a time, mixing seed demonstration inputs
    with a seeded random sample of earlier generations, until the repository
    holds ``n_raw_inputs`` entries or the attempt budget runs out (partial
    result with a warning, never a failure).  Returns each entry paired with
    the label its prompt requested (None for generation tasks).
    """
    rng = random.Random(params.rng_seed)
    repository = InputRepository()
    entries: list[tuple[str, str | None]] = []
    seed_inputs = [d.input for d in task.demonstrations]
    budget = ATTEMPT_BUDGET_FACTOR * params.n_raw_inputs
    attempts = 0
    dropped = 0

    while len(repository) < params.n_raw_inputs and attempts < budget:
        attempts += 1
        label = rng.choice(task.labels) if task.is_classification else None
        low_quality = repository.sample(params.repo_sample_size, rng)
        prompt = render_input_prompt(task, seed_inputs, low_quality, label,
                                     templates=templates)
        request = GenerationRequest(
            prompt=prompt,
            temperature=params.input_temperature,
            max_new_tokens=params.max_new_tokens_input,
            seed=rng.randrange(2**31),
        )
        response = backend.generate(request)
        if response.finish_reason is FinishReason.ERROR:
            dropped += 1
            continue
        try:
            text = parse_generated_input(response.text)
        except InputParseError:
            dropped += 1
            continue
        if repository.add(text):
            entries.append((text, label))

    if len(repository) < params.n_raw_inputs:
        logger.warning(
            "input generation stopped at %d/%d entries after %d attempts "
            "(%d unusable responses); returning partial result",
            len(repository),
            params.n_raw_inputs,
            attempts,
            dropped,
        )
    return entries, repository


def annotate_outputs(
    task: TaskSpec,
    inputs: list[str],
    params: SynthesisParams,
    backend: GenerationBackend,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> tuple[list[Example], int]:
    """Label each input by in-context prompting at the output temperature.

    The model's trimmed response becomes the output; a requested label never
    overrides it.  Inputs whose backend call errors are dropped and counted.
    Returns (examples, dropped_count).
    """
    requests = [
        GenerationRequest(
            prompt=render_annotation_prompt(task, text, templates=templates),
            temperature=params.output_temperature,
            max_new_tokens=params.max_new_tokens_output,
            stop_sequences=ANNOTATION_STOP_SEQUENCES,
            seed=params.rng_seed,
        )
        for text in inputs
    ]
    examples: list[Example] = []
    dropped = 0
    for text, response in zip(inputs, backend.batch_generate(requests)):
        if response.finish_reason is FinishReason.ERROR:
            dropped += 1
            continue
        output = response.text.strip()
        if not output:
            dropped += 1
            continue
        examples.append(Example(input=text, output=output, provenance=Provenance.SYNTHETIC))
    if dropped:
        logger.warning("annotation dropped %d/%d inputs", dropped, len(inputs))
    return examples, dropped


@dataclass(frozen=True)
class PipelineResult:
    dataset: SyntheticDataset
    rejections: tuple[Rejection, ...]
    requested_labels: tuple[str | None, ...]
    annotation_dropped: int


def run_pipeline(
    task: TaskSpec,
    params: SynthesisParams,
    backend: GenerationBackend,
    filter_config: FilterConfig,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> PipelineResult:
    """Full synthesis: generate inputs, filter, annotate, filter pairs."""
    entries, repository = generate_inputs(task, params, backend, templates)
    raw_count = len(repository)
    if raw_count == 0:
        raise EmptyDatasetError("input generation", "no inputs could be generated")

    stats = compute_length_stats(task.demonstrations)
    kept_inputs, input_rejections = filter_inputs(repository.entries, stats, filter_config)
    if not kept_inputs:
        raise EmptyDatasetError(
            "input-stage filter", _dominant_reason(input_rejections)
        )

    examples, annotation_dropped = annotate_outputs(task, kept_inputs, params, backend,
                                                    templates)
    if not examples:
        raise EmptyDatasetError("annotation", "every backend call failed or was empty")

    kept_pairs, pair_rejections = filter_pairs(examples, stats, filter_config)
    if not kept_pairs:
        raise EmptyDatasetError("pair-stage filter", _dominant_reason(pair_rejections))

    dataset = SyntheticDataset(
        task_id=task.id,
        examples=tuple(kept_pairs),
        params=params,
        created_counts=StageCounts(
            raw_inputs=raw_count,
            post_input_filter=len(kept_inputs),
            post_pair_filter=len(kept_pairs),
        ),
    )
    label_by_input = {text: label for text, label in entries}
    return PipelineResult(
        dataset=dataset,
        rejections=tuple(input_rejections + pair_rejections),
        requested_labels=tuple(label_by_input.get(ex.input) for ex in kept_pairs),
        annotation_dropped=annotation_dropped,
    )


def _dominant_reason(rejections: list[Rejection]) -> str:
    noise = sum(1 for r in rejections if r.reason.startswith("noise"))
    length = len(rejections) - noise
    if noise and not length:
        return f"noise filter rejected all {noise} candidates"
    if length and not noise:
        return f"length filter rejected all {length} candidates"
    return f"noise filter rejected {noise}, length filter rejected {length}"
