from __future__ import annotations

import json
from pathlib import Path

import pytest

from selfsynth import Example, MockBackend, TaskKind, TaskSpec

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def generation_task() -> TaskSpec:
    return TaskSpec(
        id="topicword",
        instruction="Write a topic word from a given fact.",
        kind=TaskKind.GENERATION,
        demonstrations=(
            Example("pesticides cause pollution", "pollution harms"),
            Example("the sun rises in the east", "sunrise direction"),
            Example("water boils at 100 degrees", "boiling point"),
        ),
    )


@pytest.fixture
def classification_task() -> TaskSpec:
    return TaskSpec(
        id="nli",
        instruction="Determine whether the hypothesis follows from the premise.",
        kind=TaskKind.CLASSIFICATION,
        demonstrations=(
            Example("Premise: A man eats. Hypothesis: Someone eats.", "entailment"),
            Example("Premise: A dog barks. Hypothesis: The cat sleeps.", "neutral"),
            Example("Premise: It rains. Hypothesis: It is dry.", "contradiction"),
        ),
        labels=("entailment", "neutral", "contradiction"),
    )


@pytest.fixture
def echo_backend() -> MockBackend:
    return MockBackend()


def write_niv2(
    path: Path,
    definition: str,
    positives: list[tuple[str, str]],
    instances: list[tuple[str, str]] | None = None,
    labels: list[str] | None = None,
) -> Path:
    doc: dict = {
        "Definition": [definition],
        "Positive Examples": [{"input": i, "output": o} for i, o in positives],
    }
    if instances is not None:
        doc["Instances"] = [{"input": i, "output": [o]} for i, o in instances]
    if labels is not None:
        doc["Labels"] = labels
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return path


def distinct_inputs_responder(prompt: str, seed: int | None) -> str:
    """Mock responder emitting a unique input per (prompt, seed) pair."""
    import hashlib

    h = hashlib.sha256(f"{seed}|{prompt}".encode()).hexdigest()[:10]
    return f"fact about {h} topic here"
