"""Task definitions, examples, and dataset containers.

Ingests Natural-Instructions-style task JSON files and provides the shared
immutable data types the rest of the pipeline operates on.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_KIND_THRESHOLD = 10
MAX_DEMONSTRATIONS = 3


class TaskLoadError(ValueError):
    """Raised when a task file is malformed or unusable."""


class TaskKind(str, Enum):
    CLASSIFICATION = "classification"
    GENERATION = "generation"


class Provenance(str, Enum):
    SEED = "seed"
    SYNTHETIC = "synthetic"
    RANDOMIZED = "randomized"


def normalize_output(text: str) -> str:
    """Canonical form used for label membership and exact match."""
    return text.strip().casefold()


@dataclass(frozen=True)
class Example:
    input: str
    output: str
    provenance: Provenance = Provenance.SEED

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "output": self.output,
            "provenance": self.provenance.value,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "Example":
        return cls(
            input=record["input"],
            output=record["output"],
            provenance=Provenance(record.get("provenance", "seed")),
        )


@dataclass(frozen=True)
class TaskSpec:
    """One task: an instruction, its kind, and up to three demonstrations."""

    id: str
    instruction: str
    kind: TaskKind
    demonstrations: tuple[Example, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "demonstrations", tuple(self.demonstrations))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def is_classification(self) -> bool:
        return self.kind is TaskKind.CLASSIFICATION

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "instruction": self.instruction,
            "kind": self.kind.value,
            "labels": list(self.labels),
            "demonstrations": [d.to_dict() for d in self.demonstrations],
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TaskSpec":
        return cls(
            id=record["id"],
            instruction=record["instruction"],
            kind=TaskKind(record["kind"]),
            demonstrations=tuple(Example.from_dict(d) for d in record["demonstrations"]),
            labels=tuple(record.get("labels", ())),
        )


@dataclass(frozen=True)
class SynthesisParams:
    """Knobs of one synthesis run; the tuner searches a subset of these."""

    n_raw_inputs: int = 40
    input_temperature: float = 1.0
    output_temperature: float = 0.0
    repo_sample_size: int = 3
    max_new_tokens_input: int = 256
    max_new_tokens_output: int = 128
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_raw_inputs < 1:
            raise ValueError("n_raw_inputs must be >= 1")
        if self.repo_sample_size < 0:
            raise ValueError("repo_sample_size must be >= 0")
        if self.input_temperature < 0 or self.output_temperature < 0:
            raise ValueError("temperatures must be >= 0")
        if self.input_temperature < self.output_temperature:
            raise ValueError(
                "input_temperature must be >= output_temperature "
                f"(got {self.input_temperature} < {self.output_temperature})"
            )
        if self.max_new_tokens_input < 1 or self.max_new_tokens_output < 1:
            raise ValueError("max_new_tokens must be >= 1")

    def to_dict(self) -> dict:
        return {
            "n_raw_inputs": self.n_raw_inputs,
            "input_temperature": self.input_temperature,
            "output_temperature": self.output_temperature,
            "repo_sample_size": self.repo_sample_size,
            "max_new_tokens_input": self.max_new_tokens_input,
            "max_new_tokens_output": self.max_new_tokens_output,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "SynthesisParams":
        return cls(**record)


@dataclass(frozen=True)
class StageCounts:
    raw_inputs: int
    post_input_filter: int
    post_pair_filter: int

    def to_dict(self) -> dict:
        return {
            "raw_inputs": self.raw_inputs,
            "post_input_filter": self.post_input_filter,
            "post_pair_filter": self.post_pair_filter,
        }


@dataclass(frozen=True)
class SyntheticDataset:
    task_id: str
    examples: tuple[Example, ...]
    params: SynthesisParams
    created_counts: StageCounts = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        if self.created_counts is None:
            n = len(self.examples)
            object.__setattr__(self, "created_counts", StageCounts(n, n, n))
        c = self.created_counts
        if not (c.post_pair_filter == len(self.examples) <= c.post_input_filter <= c.raw_inputs):
            raise ValueError(
                "inconsistent stage counts: "
                f"{c.to_dict()} with {len(self.examples)} examples"
            )

    def __len__(self) -> int:
        return len(self.examples)


def load_niv2_task(
    path: str | Path,
    kind_override: TaskKind | None = None,
    kind_threshold: int = DEFAULT_KIND_THRESHOLD,
) -> TaskSpec:
    """Load a Natural-Instructions V2 task file into a TaskSpec.

    The instruction is the first Definition entry and the demonstrations are
    the first three positive examples in file order.  The task kind is
    inferred from an explicit label inventory when present, otherwise from the
    number of distinct outputs across demonstrations and instances
    (<= ``kind_threshold`` means classification); ``kind_override`` wins over
    both.
    """
    path = Path(path)
    if not path.exists():
        raise TaskLoadError(f"task file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TaskLoadError(f"task file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TaskLoadError(f"task file {path}: top-level value must be an object")

    definition = doc.get("Definition")
    if not isinstance(definition, list) or not definition:
        raise TaskLoadError(f"task file {path}: field 'Definition' must be a non-empty list")
    instruction = str(definition[0])

    positives = doc.get("Positive Examples")
    if not isinstance(positives, list):
        raise TaskLoadError(f"task file {path}: field 'Positive Examples' must be a list")
    if not positives:
        raise TaskLoadError(f"task file {path}: no positive examples")

    demonstrations = []
    for i, entry in enumerate(positives[:MAX_DEMONSTRATIONS]):
        if not isinstance(entry, dict) or "input" not in entry or "output" not in entry:
            raise TaskLoadError(
                f"task file {path}: positive example {i} missing 'input'/'output'"
            )
        demonstrations.append(
            Example(str(entry["input"]), str(entry["output"]), Provenance.SEED)
        )

    inventory = doc.get("Labels")
    if inventory is not None and not isinstance(inventory, list):
        raise TaskLoadError(f"task file {path}: field 'Labels' must be a list")

    outputs = [d.output for d in demonstrations]
    for inp, gold in load_niv2_instances(path, doc=doc):
        outputs.append(gold)
    distinct = _dedupe_normalized(outputs)

    if kind_override is not None:
        kind = kind_override
    elif inventory:
        kind = TaskKind.CLASSIFICATION
    elif len(distinct) <= kind_threshold:
        kind = TaskKind.CLASSIFICATION
    else:
        kind = TaskKind.GENERATION

    labels: tuple[str, ...] = ()
    if kind is TaskKind.CLASSIFICATION:
        labels = tuple(str(x) for x in inventory) if inventory else tuple(distinct)

    return TaskSpec(
        id=path.stem,
        instruction=instruction,
        kind=kind,
        demonstrations=tuple(demonstrations),
        labels=labels,
    )


def load_niv2_instances(
    path: str | Path,
    limit: int | None = None,
    doc: dict | None = None,
) -> list[tuple[str, str]]:
    """Return (input, gold) pairs from a task file's Instances section.

    NIv2 stores instance outputs as a list of references; the first one is
    used as the gold answer.  Tasks without instances return an empty list.
    """
    if doc is None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    instances = doc.get("Instances", [])
    if not isinstance(instances, list):
        raise TaskLoadError(f"task file {path}: field 'Instances' must be a list")
    pairs: list[tuple[str, str]] = []
    for entry in instances[: limit if limit is not None else len(instances)]:
        if not isinstance(entry, dict):
            continue
        output = entry.get("output", "")
        if isinstance(output, list):
            output = output[0] if output else ""
        pairs.append((str(entry.get("input", "")), str(output)))
    return pairs


def _dedupe_normalized(values: Iterable[str]) -> list[str]:
    """First-occurrence dedupe under output normalization."""
    seen: set[str] = set()
    out: list[str] = []
    for value in values:
        key = normalize_output(value)
        if key and key not in seen:
            seen.add(key)
            out.append(value.strip())
    return out


def validate_task(task: TaskSpec) -> list[str]:
    """Report every violated task invariant; an empty list means valid."""
    problems: list[str] = []
    if not task.instruction.strip():
        problems.append("instruction empty")
    if not task.demonstrations:
        problems.append("no demonstrations")
    if len(task.demonstrations) > MAX_DEMONSTRATIONS:
        problems.append(
            f"too many demonstrations ({len(task.demonstrations)} > {MAX_DEMONSTRATIONS})"
        )
    for i, demo in enumerate(task.demonstrations):
        if not demo.input.strip():
            problems.append(f"demonstration {i}: input empty")
        if not demo.output.strip():
            problems.append(f"demonstration {i}: output empty")
    if task.is_classification:
        if len(task.labels) < 2:
            problems.append(f"classification task needs >= 2 labels, got {len(task.labels)}")
        normalized = [normalize_output(x) for x in task.labels]
        if len(set(normalized)) != len(normalized):
            problems.append("duplicate labels after normalization")
        label_set = set(normalized)
        for i, demo in enumerate(task.demonstrations):
            if normalize_output(demo.output) not in label_set:
                problems.append(
                    f"demonstration {i}: output {demo.output!r} not in label set"
                )
    elif task.labels:
        problems.append("generation task carries a label set")
    return problems


def select_demonstrations(task: TaskSpec, k: int, seed: int) -> list[Example]:
    """Seeded sample of k demonstrations without replacement.

    k equal to the full demonstration count returns them in original order;
    smaller k draws a stable random subset.
    """
    n = len(task.demonstrations)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if k == n:
        return list(task.demonstrations)
    return random.Random(seed).sample(list(task.demonstrations), k)


def save_examples_jsonl(examples: Sequence[Example], path: str | Path) -> int:
    """Write examples as JSON Lines; byte-stable for equal inputs."""
    path = Path(path)
    lines = [
        json.dumps(ex.to_dict(), ensure_ascii=False, sort_keys=True) for ex in examples
    ]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return len(lines)


def load_examples_jsonl(path: str | Path) -> list[Example]:
    examples: list[Example] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            examples.append(Example.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise TaskLoadError(f"{path}:{lineno}: bad example record: {exc}") from exc
    return examples
