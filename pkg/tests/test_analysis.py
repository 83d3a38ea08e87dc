from __future__ import annotations

import collections

import pytest

from selfsynth import (
    AblationVariant,
    ConjunctionVariant,
    Example,
    FilterConfig,
    MockBackend,
    Provenance,
    SyntheticDataset,
    SynthesisParams,
    TaskKind,
    TaskSpec,
    build_self_icl_prompt,
    distribution_report,
    prompt_sensitivity_sweep,
    randomize_demo_labels,
    randomize_labels,
    run_filter_ablation,
)
from selfsynth.analysis import sweep_diff

from conftest import distinct_inputs_responder


def make_dataset(task_id, outputs, input_stem="synthetic input"):
    examples = tuple(
        Example(f"{input_stem} {i}", output, Provenance.SYNTHETIC)
        for i, output in enumerate(outputs)
    )
    return SyntheticDataset(task_id=task_id, examples=examples, params=SynthesisParams())


def test_randomize_labels_deterministic(classification_task):
    dataset = make_dataset("nli", ["entailment"] * 20)
    first = randomize_labels(dataset, classification_task.labels, seed=5)
    second = randomize_labels(dataset, classification_task.labels, seed=5)
    assert first.examples == second.examples
    assert all(e.provenance is Provenance.RANDOMIZED for e in first.examples)
    assert [e.input for e in first.examples] == [e.input for e in dataset.examples]
    assert len(first) == len(dataset)


def test_randomize_labels_singleton_set():
    dataset = make_dataset("t", ["only"] * 4)
    randomized = randomize_labels(dataset, ["only"], seed=3)
    assert [e.output for e in randomized.examples] == ["only"] * 4
    assert all(e.provenance is Provenance.RANDOMIZED for e in randomized.examples)


def test_randomize_labels_binomial_band():
    dataset = make_dataset("t", ["x"] * 300)
    randomized = randomize_labels(dataset, ["l1", "l2", "l3"], seed=11)
    counts = collections.Counter(e.output for e in randomized.examples)
    for label in ("l1", "l2", "l3"):
        assert 65 <= counts[label] <= 135  # 100 +- 35 per the binomial band


def test_randomize_labels_requires_labels():
    dataset = make_dataset("gen", ["free text"])
    with pytest.raises(ValueError, match="label"):
        randomize_labels(dataset, [], seed=0)


def test_randomize_demo_labels_deterministic(classification_task):
    first = randomize_demo_labels(classification_task, seed=2)
    second = randomize_demo_labels(classification_task, seed=2)
    assert first == second
    assert [d.input for d in first.demonstrations] == [
        d.input for d in classification_task.demonstrations
    ]
    assert all(d.output in classification_task.labels for d in first.demonstrations)


def test_randomize_demo_labels_generation_rejected(generation_task):
    with pytest.raises(ValueError, match="classification"):
        randomize_demo_labels(generation_task, seed=0)


def test_randomize_demo_labels_singleton_set():
    task = TaskSpec(
        id="one", instruction="Always the same.", kind=TaskKind.CLASSIFICATION,
        demonstrations=(Example("input text here", "only"),), labels=("only",),
    )
    randomized = randomize_demo_labels(task, seed=7)
    assert [d.output for d in randomized.demonstrations] == ["only"]
    assert [d.input for d in randomized.demonstrations] == ["input text here"]


def test_randomize_demo_labels_uniform_over_seeds():
    task = TaskSpec(
        id="bin", instruction="Yes or no?", kind=TaskKind.CLASSIFICATION,
        demonstrations=(Example("question text here", "yes"),),
        labels=("yes", "no"),
    )
    counts = collections.Counter(
        randomize_demo_labels(task, seed).demonstrations[0].output
        for seed in range(1000)
    )
    # binomial n=1000 p=0.5: 2.5 sigma ~ 40
    assert 460 <= counts["yes"] <= 540


def test_self_icl_huge_budget_packs_everything(generation_task):
    dataset = make_dataset("topicword", [f"topic {i}" for i in range(7)])
    prompt, k_used = build_self_icl_prompt(
        generation_task, dataset, context_budget=10**6, query_input="a new fact"
    )
    assert k_used == 7
    assert prompt.count("USER : [input]") == 3 + 7


def test_self_icl_budget_admits_exactly_two(generation_task):
    dataset = make_dataset("topicword", [f"topic {i}" for i in range(7)])
    base, _ = build_self_icl_prompt(generation_task, dataset, 10**6, "a new fact")
    # budget sized to the 2-example prompt: packing stops there
    two_prompt_len = None
    demos = list(generation_task.demonstrations)
    from selfsynth.prompts import render_chat_prompt

    two_prompt_len = len(render_chat_prompt(
        generation_task.instruction, demos + list(dataset.examples[:2]), "a new fact"
    ))
    prompt, k_used = build_self_icl_prompt(
        generation_task, dataset, two_prompt_len, "a new fact"
    )
    assert k_used == 2
    assert len(prompt) <= two_prompt_len


def test_self_icl_budget_below_base_prompt_errors(generation_task):
    dataset = make_dataset("topicword", ["topic"])
    with pytest.raises(ValueError, match="budget of 10"):
        build_self_icl_prompt(generation_task, dataset, 10, "a new fact")


def test_self_icl_k_is_maximal(generation_task):
    dataset = make_dataset("topicword", [f"topic {i}" for i in range(5)])
    for budget in (350, 500, 700, 900):
        try:
            prompt, k_used = build_self_icl_prompt(
                generation_task, dataset, budget, "a new fact"
            )
        except ValueError:
            continue
        assert len(prompt) <= budget
        if k_used < len(dataset.examples):
            from selfsynth.prompts import render_chat_prompt

            bigger = render_chat_prompt(
                generation_task.instruction,
                list(generation_task.demonstrations) + list(dataset.examples[: k_used + 1]),
                "a new fact",
            )
            assert len(bigger) > budget


def _ablation_backend():
    def responder(prompt, seed):
        if prompt.startswith("As an InputGenerator"):
            return distinct_inputs_responder(prompt, seed)
        # every third annotation is noisy, every fifth too long
        h = sum(prompt.encode()) % 15
        if h % 3 == 0:
            return "Sure! pollution harms"
        if h % 5 == 0:
            return "a very long answer that runs on and on well past the output band"
        return "pollution harms"

    return MockBackend(responder)


def test_filter_ablation_variant_relations(generation_task):
    config = FilterConfig(noise_terms=("Sure!",))
    params = SynthesisParams(n_raw_inputs=25, rng_seed=13)
    run = run_filter_ablation(
        generation_task, params, _ablation_backend(), list(AblationVariant), config
    )
    kept = {v: {(e.input, e.output) for e in run.datasets[v].examples}
            for v in AblationVariant}

    assert all(
        len(kept[AblationVariant.WITHOUT_BOTH]) >= len(kept[v]) for v in AblationVariant
    )
    assert kept[AblationVariant.WITH_BOTH] == (
        kept[AblationVariant.WITHOUT_NOISE] & kept[AblationVariant.WITHOUT_LENGTH]
    )
    counts = run.datasets[AblationVariant.WITH_BOTH].created_counts
    assert counts.raw_inputs == 25
    assert len(kept[AblationVariant.WITHOUT_BOTH]) == 25


def test_filter_ablation_shares_raw_generations(generation_task):
    config = FilterConfig(noise_terms=("Sure!",))
    params = SynthesisParams(n_raw_inputs=15, rng_seed=8)
    first = run_filter_ablation(
        generation_task, params, _ablation_backend(), list(AblationVariant), config
    )
    second = run_filter_ablation(
        generation_task, params, _ablation_backend(), list(AblationVariant), config
    )
    assert first.raw_digest == second.raw_digest
    assert first.raw_inputs == second.raw_inputs


def test_sweep_conjunction_insensitive_backend_gives_zero_diff(classification_task):
    backend = MockBackend(lambda prompt, seed: "entailment")
    instances = [("Premise: p. Hypothesis: q.", "entailment")] * 4
    result = prompt_sensitivity_sweep(
        classification_task, backend, list(ConjunctionVariant), instances
    )
    assert result.diff == 0.0
    assert all(r.percent == 100.0 for r in result.results.values())


def test_sweep_sensitive_backend_reports_spread(classification_task):
    def responder(prompt, seed):
        if "USER : [input] :" in prompt:
            return "neutral"
        return "entailment"

    instances = [("Premise: p. Hypothesis: q.", "entailment")] * 4
    result = prompt_sensitivity_sweep(
        classification_task, MockBackend(responder),
        [ConjunctionVariant.EQUALS_NEWLINE, ConjunctionVariant.COLON], instances,
    )
    assert result.scores[ConjunctionVariant.EQUALS_NEWLINE] == 100.0
    assert result.scores[ConjunctionVariant.COLON] == 0.0
    assert result.diff == 100.0


def test_sweep_requires_two_variants(classification_task):
    with pytest.raises(ValueError, match="two variants"):
        prompt_sensitivity_sweep(
            classification_task, MockBackend(), [ConjunctionVariant.COLON],
            [("x", "y")],
        )


def test_sweep_diff_table_fixture():
    assert sweep_diff([27.0, 21.1, 19.8]) == 7.2


def test_distribution_report_tuned_on_label(classification_task):
    golds = ["entailment", "neutral", "contradiction", "entailment"]
    tuned = ["entailment", "neutral", "neutral", "entailment"]
    baseline = ["Hello there!", "neutral", "no idea", "entailment"]
    row = distribution_report(classification_task, baseline, tuned, golds)
    assert row.irrelevant_tuned == 0.0
    assert row.irrelevant_baseline == pytest.approx(0.5)
    assert row.accuracy_tuned == pytest.approx(0.75)


def test_distribution_report_baseline_equals_gold(classification_task):
    golds = ["entailment", "neutral", "contradiction"]
    row = distribution_report(classification_task, golds, golds, golds)
    assert row.accuracy_baseline == 1.0
    assert row.l1_baseline == pytest.approx(0.0)
    assert row.irrelevant_baseline == 0.0


def test_distribution_report_ninety_percent_off_label(classification_task):
    golds = ["entailment"] * 10
    baseline = ["gibberish"] * 9 + ["entailment"]
    tuned = ["entailment"] * 10
    row = distribution_report(classification_task, baseline, tuned, golds)
    assert row.irrelevant_baseline == pytest.approx(0.90)
    assert row.irrelevant_tuned == 0.0


def test_distribution_report_length_mismatch(classification_task):
    with pytest.raises(ValueError, match="equal lengths"):
        distribution_report(classification_task, ["a"], ["b", "c"], ["d"])


def test_distribution_report_generation_rejected(generation_task):
    with pytest.raises(ValueError, match="classification"):
        distribution_report(generation_task, ["a"], ["b"], ["c"])
