from __future__ import annotations

import itertools
import math
import random

import pytest

from selfsynth import Example, ParamSpace, SynthesisParams, TaskKind, TaskSpec, objective, random_search
from selfsynth.tuning import split_tune_holdout


def make_task(task_id, kind=TaskKind.GENERATION):
    labels = ("a", "b") if kind is TaskKind.CLASSIFICATION else ()
    output = "a" if kind is TaskKind.CLASSIFICATION else "out"
    return TaskSpec(
        id=task_id, instruction="inst", kind=kind,
        demonstrations=(Example("in text here", output),), labels=labels,
    )


DISCRETE_SPACE = ParamSpace(
    input_temperature_range=(1.0, 1.0),
    output_temperature_range=(0.0, 0.0),
    n_raw_inputs_choices=(10, 20),
    repo_sample_size_choices=(0, 1, 2),
)


def table_evaluate(table):
    def evaluate(params: SynthesisParams, task: TaskSpec) -> float:
        return table[(params.n_raw_inputs, params.repo_sample_size)][task.id]

    return evaluate


def test_objective_minimum():
    assert objective({"t1": 5.0, "t2": -2.0}) == -2.0
    assert objective({"t1": 3.0, "t2": 1.0}) == 1.0
    assert objective({"t": 7.0}) == 7.0


def test_objective_empty_rejected():
    with pytest.raises(ValueError):
        objective({})


def test_forced_case_picks_better_worst_case():
    tasks = [make_task("t1"), make_task("t2")]
    space = ParamSpace(
        input_temperature_range=(1.0, 1.0),
        output_temperature_range=(0.0, 0.0),
        n_raw_inputs_choices=(10, 20),
        repo_sample_size_choices=(0,),
    )
    # point 10 -> deltas [5, -2]; point 20 -> deltas [3, 1]
    table = {
        (10, 0): {"t1": 5.0, "t2": -2.0},
        (20, 0): {"t1": 3.0, "t2": 1.0},
    }
    baseline = {"t1": 0.0, "t2": 0.0}
    best, records = random_search(
        tasks, baseline, space, trials=30, seed=7, evaluate=table_evaluate(table)
    )
    assert best.params.n_raw_inputs == 20
    assert best.objective == 1.0
    assert len(records) == 30


def test_full_coverage_matches_exhaustive_argmax():
    tasks = [make_task("t1"), make_task("t2"), make_task("t3")]
    points = list(itertools.product((10, 20), (0, 1, 2)))
    for table_seed in range(10):
        rng = random.Random(table_seed)
        table = {
            point: {t.id: rng.uniform(-10, 10) for t in tasks} for point in points
        }
        baseline = {t.id: 0.0 for t in tasks}
        best, records = random_search(
            tasks, baseline, DISCRETE_SPACE, trials=120, seed=1000 + table_seed,
            evaluate=table_evaluate(table),
        )
        visited = {(r.params.n_raw_inputs, r.params.repo_sample_size) for r in records}
        assert visited == set(points), "seeded trials did not cover the space"
        exhaustive = max(min(table[p].values()) for p in points)
        assert best.objective == pytest.approx(exhaustive)


def test_evaluate_failure_becomes_neg_inf_and_never_wins():
    tasks = [make_task("t1"), make_task("t2")]
    space = ParamSpace(
        input_temperature_range=(1.0, 1.0),
        output_temperature_range=(0.0, 0.0),
        n_raw_inputs_choices=(10, 20),
        repo_sample_size_choices=(0,),
    )

    def evaluate(params, task):
        if params.n_raw_inputs == 10 and task.id == "t2":
            raise RuntimeError("infrastructure hiccup")
        return 1.0

    best, records = random_search(
        tasks, {"t1": 0.0, "t2": 0.0}, space, trials=40, seed=3, evaluate=evaluate
    )
    assert best.params.n_raw_inputs == 20
    failed = [r for r in records if r.params.n_raw_inputs == 10]
    assert failed and all(math.isinf(r.objective) for r in failed)


def test_determinism_same_seed_same_best():
    tasks = [make_task("t1"), make_task("t2")]
    table = {
        (p, r): {"t1": (p + r) % 7 - 3.0, "t2": (p * r) % 5 - 2.0}
        for p in (10, 20) for r in (0, 1, 2)
    }
    baseline = {"t1": 0.0, "t2": 0.0}
    run = lambda: random_search(
        tasks, baseline, DISCRETE_SPACE, trials=25, seed=99,
        evaluate=table_evaluate(table),
    )
    best1, records1 = run()
    best2, records2 = run()
    assert best1 == best2
    assert records1 == records2


def test_constant_shift_leaves_argmax_unchanged():
    tasks = [make_task("t1"), make_task("t2")]
    rng = random.Random(5)
    table = {
        (p, r): {t.id: rng.uniform(-5, 5) for t in tasks}
        for p in (10, 20) for r in (0, 1, 2)
    }
    baseline = {t.id: 0.0 for t in tasks}
    shift = 13.25

    best_plain, _ = random_search(
        tasks, baseline, DISCRETE_SPACE, trials=100, seed=2,
        evaluate=table_evaluate(table),
    )
    shifted_eval = lambda params, task: table_evaluate(table)(params, task) + shift
    best_shifted, _ = random_search(
        tasks, baseline, DISCRETE_SPACE, trials=100, seed=2, evaluate=shifted_eval
    )
    assert best_shifted.params == best_plain.params
    assert best_shifted.objective == pytest.approx(best_plain.objective + shift)


def test_selected_objective_dominates_all_trials():
    tasks = [make_task("t1")]
    rng = random.Random(8)
    table = {(p, r): {"t1": rng.uniform(-3, 3)} for p in (10, 20) for r in (0, 1, 2)}
    best, records = random_search(
        tasks, {"t1": 0.0}, DISCRETE_SPACE, trials=50, seed=4,
        evaluate=table_evaluate(table),
    )
    assert all(best.objective >= r.objective for r in records)


def test_tie_breaks_to_earliest_trial():
    tasks = [make_task("t1")]
    best, records = random_search(
        tasks, {"t1": 0.0}, DISCRETE_SPACE, trials=20, seed=6,
        evaluate=lambda params, task: 4.0,
    )
    assert best.trial_index == 0


def test_baseline_must_cover_all_tasks():
    with pytest.raises(ValueError, match="missing"):
        random_search(
            [make_task("t1"), make_task("t2")], {"t1": 0.0}, DISCRETE_SPACE,
            trials=1, seed=0, evaluate=lambda p, t: 0.0,
        )


def test_draw_respects_temperature_ordering():
    space = ParamSpace(
        input_temperature_range=(0.4, 0.6),
        output_temperature_range=(0.0, 0.6),
        n_raw_inputs_choices=(10,),
        repo_sample_size_choices=(0,),
    )
    rng = random.Random(0)
    base = SynthesisParams()
    for _ in range(200):
        params = space.draw(rng, base)
        assert params.input_temperature >= params.output_temperature
        assert 0.4 <= params.input_temperature <= 0.6


def test_split_tune_holdout_halves_per_kind():
    tasks = [make_task(f"c{i}", TaskKind.CLASSIFICATION) for i in range(6)]
    tasks += [make_task(f"g{i}", TaskKind.GENERATION) for i in range(4)]
    tune, holdout = split_tune_holdout(tasks, seed=1)
    assert len(tune) == 5 and len(holdout) == 5
    assert sum(1 for t in tune if t.kind is TaskKind.CLASSIFICATION) == 3
    assert sum(1 for t in holdout if t.kind is TaskKind.GENERATION) == 2
    assert {t.id for t in tune} | {t.id for t in holdout} == {t.id for t in tasks}
    assert not ({t.id for t in tune} & {t.id for t in holdout})
    again_tune, again_holdout = split_tune_holdout(tasks, seed=1)
    assert [t.id for t in again_tune] == [t.id for t in tune]
