from __future__ import annotations

import json

import pytest

from selfsynth import Example, Provenance, TaskKind, TaskSpec, validate_task
from selfsynth.tasks import (
    TaskLoadError,
    load_examples_jsonl,
    load_niv2_instances,
    load_niv2_task,
    save_examples_jsonl,
    select_demonstrations,
)

from conftest import write_niv2


def test_load_generation_task(tmp_path):
    # many distinct instance outputs push the kind past the threshold
    instances = [(f"fact number {i} here", f"unique topic {i}") for i in range(15)]
    path = write_niv2(
        tmp_path / "task001_topic.json",
        "Write a topic word from a given fact.",
        [("pesticides cause pollution", "pollution harms"),
         ("the sun rises in the east", "sunrise direction")],
        instances=instances,
    )
    task = load_niv2_task(path)
    assert task.kind is TaskKind.GENERATION
    assert len(task.demonstrations) == 2
    assert task.instruction == "Write a topic word from a given fact."
    assert task.id == "task001_topic"
    assert task.labels == ()


def test_load_classification_task_from_inventory(tmp_path):
    instances = [("premise one", "entailment"), ("premise two", "neutral"),
                 ("premise three", "contradiction")]
    path = write_niv2(
        tmp_path / "task002_nli.json",
        "Label the relation between premise and hypothesis.",
        [("p1 h1", "entailment"), ("p2 h2", "neutral")],
        instances=instances,
        labels=["entailment", "neutral", "contradiction"],
    )
    task = load_niv2_task(path)
    assert task.kind is TaskKind.CLASSIFICATION
    assert task.labels == ("entailment", "neutral", "contradiction")


def test_load_classification_inferred_from_output_cardinality(tmp_path):
    path = write_niv2(
        tmp_path / "task003.json",
        "Answer yes or no.",
        [("is water wet", "yes"), ("is fire cold", "no")],
        instances=[(f"question {i}", "yes" if i % 2 else "no") for i in range(20)],
    )
    task = load_niv2_task(path)
    assert task.kind is TaskKind.CLASSIFICATION
    assert set(task.labels) == {"yes", "no"}


def test_kind_override_wins(tmp_path):
    path = write_niv2(
        tmp_path / "task004.json",
        "Answer yes or no.",
        [("is water wet", "yes"), ("is fire cold", "no")],
    )
    task = load_niv2_task(path, kind_override=TaskKind.GENERATION)
    assert task.kind is TaskKind.GENERATION


def test_demonstrations_truncated_to_three(tmp_path):
    positives = [(f"input {i} text", f"output {i}") for i in range(5)]
    path = write_niv2(tmp_path / "task005.json", "Do the thing.", positives,
                      instances=[(f"x{i}", f"y{i}") for i in range(20)])
    task = load_niv2_task(path)
    assert len(task.demonstrations) == 3
    assert [d.input for d in task.demonstrations] == ["input 0 text", "input 1 text", "input 2 text"]


def test_load_rejects_malformed_json(tmp_path):
    path = tmp_path / "task006.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(TaskLoadError, match="JSON"):
        load_niv2_task(path)


def test_load_rejects_missing_definition(tmp_path):
    path = tmp_path / "task007.json"
    path.write_text(json.dumps({"Positive Examples": []}), encoding="utf-8")
    with pytest.raises(TaskLoadError, match="Definition"):
        load_niv2_task(path)


def test_load_rejects_zero_positive_examples(tmp_path):
    path = write_niv2(tmp_path / "task008.json", "Do it.", [])
    with pytest.raises(TaskLoadError, match="positive"):
        load_niv2_task(path)


def test_load_instances(tmp_path):
    path = write_niv2(tmp_path / "task009.json", "Echo.", [("a b", "c")],
                      instances=[("q1 text", "a1"), ("q2 text", "a2")])
    assert load_niv2_instances(path) == [("q1 text", "a1"), ("q2 text", "a2")]
    assert load_niv2_instances(path, limit=1) == [("q1 text", "a1")]


def test_round_trip_is_fixed_point(tmp_path, classification_task):
    once = TaskSpec.from_dict(classification_task.to_dict())
    twice = TaskSpec.from_dict(once.to_dict())
    assert once == classification_task
    assert twice == once


def test_loaded_classification_demo_outputs_subset_of_labels(tmp_path):
    path = write_niv2(
        tmp_path / "task010.json",
        "Classify sentiment.",
        [("great movie really", "positive"), ("bad movie really", "negative")],
        instances=[(f"film {i}", "positive" if i % 2 else "negative") for i in range(8)],
    )
    task = load_niv2_task(path)
    normalized = {label.casefold() for label in task.labels}
    assert all(d.output.strip().casefold() in normalized for d in task.demonstrations)


def test_validate_flags_demo_output_not_in_labels(classification_task):
    bad = TaskSpec(
        id=classification_task.id,
        instruction=classification_task.instruction,
        kind=classification_task.kind,
        demonstrations=classification_task.demonstrations[:2]
        + (Example("Premise: x. Hypothesis: y.", "maybe"),),
        labels=classification_task.labels,
    )
    report = validate_task(bad)
    assert any("demonstration 2" in p for p in report)


def test_validate_passes_valid_generation_task(generation_task):
    assert validate_task(generation_task) == []


def test_validate_flags_empty_instruction(generation_task):
    bad = TaskSpec(
        id="x", instruction="  ", kind=TaskKind.GENERATION,
        demonstrations=generation_task.demonstrations,
    )
    assert "instruction empty" in validate_task(bad)


def test_select_demonstrations_full_is_identity(generation_task):
    assert select_demonstrations(generation_task, 3, seed=5) == list(
        generation_task.demonstrations
    )


def test_select_demonstrations_deterministic(generation_task):
    first = select_demonstrations(generation_task, 2, seed=42)
    second = select_demonstrations(generation_task, 2, seed=42)
    assert first == second
    assert len(first) == 2


def test_select_demonstrations_k_out_of_range(generation_task):
    with pytest.raises(ValueError):
        select_demonstrations(generation_task, 0, seed=1)
    with pytest.raises(ValueError):
        select_demonstrations(generation_task, 4, seed=1)


def test_examples_jsonl_round_trip(tmp_path):
    examples = [
        Example("some input", "some output", Provenance.SYNTHETIC),
        Example("quoted \"stuff\"", "über output", Provenance.RANDOMIZED),
    ]
    path = tmp_path / "examples.jsonl"
    assert save_examples_jsonl(examples, path) == 2
    assert load_examples_jsonl(path) == examples


def test_examples_jsonl_bytes_stable(tmp_path):
    examples = [Example("a b", "c d", Provenance.SYNTHETIC)]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_examples_jsonl(examples, p1)
    save_examples_jsonl(examples, p2)
    assert p1.read_bytes() == p2.read_bytes()
