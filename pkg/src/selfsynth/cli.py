"""Command-line surface: one subcommand per protocol, each writing its
artifacts and a reproducibility manifest under the output directory."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import analysis, reporting
from .backends import GenerationBackend, GenerationRequest, export_finetune_dataset
from .config import ConfigError, RunConfig, build_backend, parse_config, with_params
from .metrics import evaluate_task
from .prompts import all_template_digests, render_annotation_prompt
from .synthesis import run_pipeline
from .tasks import (
    SyntheticDataset,
    SynthesisParams,
    TaskKind,
    TaskSpec,
    load_examples_jsonl,
    load_niv2_instances,
    load_niv2_task,
    save_examples_jsonl,
    validate_task,
)
from .tuning import random_search, split_tune_holdout

logger = logging.getLogger(__name__)

VARIANT_CHOICES = ["equals-newline", "colon", "double-newline"]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except Exception as exc:  # surfaced as machine-readable JSON, nonzero exit
        print(
            json.dumps(
                {
                    "error": type(exc).__name__,
                    "message": str(exc),
                    "command": args.command,
                }
            ),
            file=sys.stderr,
        )
        if args.verbose:
            raise
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsynth",
        description=(
            "Synthesize task-specific training data from instructions and a "
            "handful of demonstrations, evaluate it, and tune the pipeline."
        ),
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging "
                        "(includes request/response bodies)")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--task", action="append", type=Path, default=None,
                        help="task file (repeatable; overrides config tasks)")
    common.add_argument("--output-dir", type=Path, default=None)
    common.add_argument("--seed", type=int, default=None, help="pipeline RNG seed")
    common.add_argument("--mock", action="store_true",
                        help="use the deterministic offline backend")
    common.add_argument("--endpoint-url", default=None)
    common.add_argument("--model", default=None)
    common.add_argument("--n-raw-inputs", type=int, default=None)
    common.add_argument("--input-temperature", type=float, default=None)
    common.add_argument("--output-temperature", type=float, default=None)
    common.add_argument("--repo-sample-size", type=int, default=None)
    common.add_argument("--prompt-variant", choices=VARIANT_CHOICES, default=None)
    common.add_argument("--template-dir", type=Path, default=None)
    common.add_argument("--no-noise-filter", action="store_true")
    common.add_argument("--no-length-filter", action="store_true")

    p = sub.add_parser("synthesize", parents=[common],
                       help="run the full generate/filter/annotate/filter pipeline")
    p.add_argument("--params-file", type=Path, default=None,
                   help="best-params file from `tune`")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("export-finetune", parents=[common],
                       help="write the prompt/completion training file")
    p.add_argument("--dataset", type=Path, required=True, help="dataset JSONL")
    p.add_argument("--out", type=Path, required=True, help="output JSONL path")
    p.set_defaults(handler=cmd_export_finetune)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score predictions (from a file or a live backend)")
    p.add_argument("--predictions", type=Path, default=None,
                   help="JSONL of {prediction, gold} records")
    p.add_argument("--live", action="store_true",
                   help="generate predictions from the backend over task instances")
    p.add_argument("--instances", type=Path, default=None,
                   help="JSONL of {input, gold} records (default: task Instances)")
    p.add_argument("--limit", type=int, default=None, help="cap instance count")
    p.add_argument("--per-instance", action="store_true",
                   help="include per-instance scores in the report")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("self-icl", parents=[common],
                       help="evaluate with synthetic examples packed into the prompt")
    p.add_argument("--dataset", type=Path, required=True, help="dataset JSONL")
    p.add_argument("--context-budget", type=int, default=None,
                   help="prompt budget in characters")
    p.add_argument("--instances", type=Path, default=None)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(handler=cmd_self_icl)

    p = sub.add_parser("tune", parents=[common],
                       help="random-search pipeline parameters (worst-task objective)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--baseline-scores", type=Path, default=None,
                   help="JSON {task_id: percent}; computed live when omitted")
    p.add_argument("--score-table", type=Path, default=None,
                   help="replay scores from a JSON table instead of running the pipeline")
    p.add_argument("--eval-limit", type=int, default=20,
                   help="instances per task for live scoring")
    p.add_argument("--no-split", action="store_true",
                   help="tune on all tasks instead of a seeded half")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("ablate", parents=[common],
                       help="filter ablation or label randomization")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--filters", action="store_true")
    mode.add_argument("--labels", action="store_true")
    p.add_argument("--dataset", type=Path, default=None,
                   help="dataset JSONL (required for --labels)")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("report", parents=[common],
                       help="assemble score/distribution/sensitivity tables and figures")
    p.add_argument("--scores", type=Path, default=None,
                   help="JSON with rows of {task_id, kind, baseline, tuned}")
    p.add_argument("--sensitivity", type=Path, default=None,
                   help="JSON with rows of {task_id, scores:{variant: percent}}")
    p.add_argument("--distribution", type=Path, default=None,
                   help="JSON with rows of output lists per task")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("validate", parents=[common],
                       help="check task files against the task invariants")
    p.set_defaults(handler=cmd_validate)

    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}

    def put(section: str, key: str, value) -> None:
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    put("params", "rng_seed", args.seed)
    put("params", "n_raw_inputs", args.n_raw_inputs)
    put("params", "input_temperature", args.input_temperature)
    put("params", "output_temperature", args.output_temperature)
    put("params", "repo_sample_size", args.repo_sample_size)
    put("backend", "endpoint_url", args.endpoint_url)
    put("backend", "model_name", args.model)
    if args.mock:
        put("backend", "kind", "mock")
    if args.no_noise_filter:
        put("filters", "enable_noise", False)
    if args.no_length_filter:
        put("filters", "enable_length", False)
    if args.task:
        overrides["tasks"] = [str(p) for p in args.task]
    if args.output_dir is not None:
        overrides["output_dir"] = str(args.output_dir)
    if args.prompt_variant is not None:
        overrides["prompt_variant"] = args.prompt_variant
    if args.template_dir is not None:
        overrides["template_dir"] = str(args.template_dir)
    return overrides


def load_run_config(args: argparse.Namespace) -> RunConfig:
    config = parse_config(args.config, overrides=_overrides_from_args(args))
    params_file = getattr(args, "params_file", None)
    if params_file is not None:
        doc = json.loads(Path(params_file).read_text(encoding="utf-8"))
        config = with_params(config, SynthesisParams.from_dict(doc["params"]))
    return config


def _load_tasks(config: RunConfig) -> list[TaskSpec]:
    if not config.task_paths:
        raise ConfigError("no task files configured (config key tasks or flag --task)")
    tasks = []
    for path in config.task_paths:
        kind_override = config.task_kinds.get(Path(path).stem)
        task = load_niv2_task(path, kind_override=kind_override,
                              kind_threshold=config.kind_threshold)
        problems = validate_task(task)
        if problems:
            raise ConfigError(f"task {task.id} is invalid: {'; '.join(problems)}")
        tasks.append(task)
    return tasks


def _write_manifest(config: RunConfig, command: str, extra: Mapping) -> Path:
    manifest = {
        "command": command,
        "config": config.to_dict(),
        "seed": config.params.rng_seed,
        "template_digests": all_template_digests(config.templates),
    }
    manifest.update(extra)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    path = config.output_dir / "manifest.json"
    reporting.write_json(path, manifest)
    return path


def _instances_for(args: argparse.Namespace, task_path: Path) -> list[tuple[str, str]]:
    if getattr(args, "instances", None) is not None:
        pairs = []
        for line in Path(args.instances).read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                pairs.append((str(record["input"]), str(record["gold"])))
    else:
        pairs = load_niv2_instances(task_path)
    limit = getattr(args, "limit", None)
    if limit is not None:
        pairs = pairs[:limit]
    if not pairs:
        raise ValueError(
            f"no evaluation instances found for {task_path}; supply --instances"
        )
    return pairs


def _icl_predictions(
    task: TaskSpec,
    backend: GenerationBackend,
    pairs: Sequence[tuple[str, str]],
    config: RunConfig,
) -> list[str]:
    """Greedy few-shot predictions over (input, gold) pairs."""
    templates = config.templates
    requests = [
        GenerationRequest(
            prompt=render_annotation_prompt(
                task, text, config.prompt_variant, templates=templates
            ),
            temperature=0.0,
            max_new_tokens=config.params.max_new_tokens_output,
            stop_sequences=("USER",),
        )
        for text, _ in pairs
    ]
    return [r.text.strip() for r in backend.batch_generate(requests)]


def cmd_synthesize(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    backend = build_backend(config)
    templates = config.templates
    per_task: dict[str, dict] = {}
    for task, task_path in zip(tasks, config.task_paths):
        result = run_pipeline(task, config.params, backend, config.filters, templates)
        task_dir = config.output_dir / task.id
        task_dir.mkdir(parents=True, exist_ok=True)
        dataset_path = task_dir / "dataset.jsonl"
        save_examples_jsonl(result.dataset.examples, dataset_path)
        rejections_path = task_dir / "rejections.jsonl"
        rejections_path.write_text(
            "".join(
                json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n"
                for r in result.rejections
            ),
            encoding="utf-8",
        )
        per_task[task.id] = {
            "task_file": str(task_path),
            "counts": result.dataset.created_counts.to_dict(),
            "annotation_dropped": result.annotation_dropped,
            "dataset_file": str(dataset_path),
            "dataset_sha256": reporting.file_digest(dataset_path),
            "requested_label_counts": _label_counts(result.requested_labels),
        }
        logger.info(
            "task %s: %d examples (raw %d -> input filter %d -> pairs %d)",
            task.id,
            len(result.dataset),
            result.dataset.created_counts.raw_inputs,
            result.dataset.created_counts.post_input_filter,
            result.dataset.created_counts.post_pair_filter,
        )
    _write_manifest(config, "synthesize", {"tasks": per_task})
    return 0


def _label_counts(labels: Sequence[str | None]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for label in labels:
        if label is not None:
            counts[label] = counts.get(label, 0) + 1
    return counts


def cmd_export_finetune(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    if len(tasks) != 1:
        raise ConfigError("export-finetune works on exactly one task")
    task = tasks[0]
    examples = load_examples_jsonl(args.dataset)
    dataset = SyntheticDataset(task_id=task.id, examples=tuple(examples), params=config.params)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    count = export_finetune_dataset(task, dataset, config.prompt_variant, args.out)
    _write_manifest(config, "export-finetune", {
        "records_written": count,
        "output_file": str(args.out),
        "output_sha256": reporting.file_digest(args.out),
    })
    logger.info("wrote %d training records to %s", count, args.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    if len(tasks) != 1:
        raise ConfigError("evaluate works on exactly one task")
    task = tasks[0]

    if args.predictions is not None:
        predictions, golds = [], []
        for line in Path(args.predictions).read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                predictions.append(str(record["prediction"]))
                golds.append(str(record["gold"]))
    elif args.live:
        backend = build_backend(config)
        pairs = _instances_for(args, config.task_paths[0])
        predictions = _icl_predictions(task, backend, pairs, config)
        golds = [gold for _, gold in pairs]
    else:
        raise ConfigError("evaluate needs --predictions or --live")

    result = evaluate_task(task, predictions, golds)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    report_path = config.output_dir / f"eval_{task.id}.json"
    manifest_path = _write_manifest(config, "evaluate", {
        "task_id": task.id,
        "aggregate": result.percent,
        "n": len(result.per_instance_scores),
    })
    reporting.write_eval_report(
        result, report_path, include_per_instance=args.per_instance,
        manifest_hash=reporting.file_digest(manifest_path),
    )
    print(f"{task.id} {result.metric_kind.value} {result.percent}")
    return 0


def cmd_self_icl(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    if len(tasks) != 1:
        raise ConfigError("self-icl works on exactly one task")
    task = tasks[0]
    backend = build_backend(config)
    examples = load_examples_jsonl(args.dataset)
    dataset = SyntheticDataset(task_id=task.id, examples=tuple(examples), params=config.params)
    budget = args.context_budget or config.context_budget_chars
    pairs = _instances_for(args, config.task_paths[0])

    requests = []
    k_values = []
    for text, _ in pairs:
        prompt, k_used = analysis.build_self_icl_prompt(
            task, dataset, budget, text, config.prompt_variant
        )
        k_values.append(k_used)
        requests.append(GenerationRequest(
            prompt=prompt,
            temperature=0.0,
            max_new_tokens=config.params.max_new_tokens_output,
            stop_sequences=("USER",),
        ))
    predictions = [r.text.strip() for r in backend.batch_generate(requests)]
    golds = [gold for _, gold in pairs]
    result = evaluate_task(task, predictions, golds)
    k_used = min(k_values)
    manifest_path = _write_manifest(config, "self-icl", {
        "task_id": task.id,
        "aggregate": result.percent,
        "n": len(pairs),
        "context_budget_chars": budget,
        "k_used_min": min(k_values),
        "k_used_max": max(k_values),
    })
    reporting.write_eval_report(
        result, config.output_dir / f"selficl_{task.id}.json",
        manifest_hash=reporting.file_digest(manifest_path),
    )
    print(f"{task.id} self-icl k={k_used} score={result.percent}")
    return 0


def _score_table_evaluate(path: Path):
    doc = json.loads(path.read_text(encoding="utf-8"))
    entries = doc["entries"]

    def lookup(params: SynthesisParams, task: TaskSpec) -> float:
        for entry in entries:
            spec = entry["params"]
            if (
                spec.get("n_raw_inputs", params.n_raw_inputs) == params.n_raw_inputs
                and spec.get("repo_sample_size", params.repo_sample_size)
                == params.repo_sample_size
                and abs(spec.get("input_temperature", params.input_temperature)
                        - params.input_temperature) < 1e-6
                and abs(spec.get("output_temperature", params.output_temperature)
                        - params.output_temperature) < 1e-6
            ):
                return float(entry["scores"][task.id])
        raise KeyError(f"score table has no entry for {params.to_dict()}")

    return lookup


def cmd_tune(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    if args.no_split or len(tasks) == 1:
        tune_tasks, holdout = tasks, []
    else:
        tune_tasks, holdout = split_tune_holdout(tasks, config.params.rng_seed)

    backend = None
    instance_cache: dict[str, list[tuple[str, str]]] = {}
    path_by_id = {Path(p).stem: p for p in config.task_paths}

    def live_instances(task: TaskSpec) -> list[tuple[str, str]]:
        if task.id not in instance_cache:
            pairs = load_niv2_instances(path_by_id[task.id])[: args.eval_limit]
            if not pairs:
                raise ValueError(f"task {task.id} has no instances for live scoring")
            instance_cache[task.id] = pairs
        return instance_cache[task.id]

    if args.score_table is not None:
        evaluate = _score_table_evaluate(args.score_table)
    else:
        backend = build_backend(config)

        def evaluate(params: SynthesisParams, task: TaskSpec) -> float:
            # Finetuning happens externally, so a parameter point is scored
            # by packing its synthetic dataset into the prompt (self-ICL).
            result = run_pipeline(task, params, backend, config.filters,
                                  config.templates)
            pairs = live_instances(task)
            requests = []
            for text, _ in pairs:
                prompt, _k = analysis.build_self_icl_prompt(
                    task, result.dataset, config.context_budget_chars, text,
                    config.prompt_variant,
                )
                requests.append(GenerationRequest(
                    prompt=prompt, temperature=0.0,
                    max_new_tokens=params.max_new_tokens_output,
                    stop_sequences=("USER",),
                ))
            predictions = [r.text.strip() for r in backend.batch_generate(requests)]
            return evaluate_task(task, predictions, [g for _, g in pairs]).percent

    if args.baseline_scores is not None:
        baseline = {
            str(k): float(v)
            for k, v in json.loads(args.baseline_scores.read_text("utf-8")).items()
        }
    elif args.score_table is not None:
        raise ConfigError("--score-table requires --baseline-scores")
    else:
        backend = backend or build_backend(config)
        baseline = {}
        for task in tune_tasks:
            pairs = live_instances(task)
            predictions = _icl_predictions(task, backend, pairs, config)
            baseline[task.id] = evaluate_task(
                task, predictions, [g for _, g in pairs]
            ).percent

    best, records = random_search(
        tune_tasks,
        baseline,
        config.search_space,
        trials=args.trials,
        seed=config.params.rng_seed,
        evaluate=evaluate,
        base_params=config.params,
    )

    config.output_dir.mkdir(parents=True, exist_ok=True)
    trials_path = config.output_dir / "trials.jsonl"
    trials_path.write_text(
        "".join(
            json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n"
            for rec in records
        ),
        encoding="utf-8",
    )
    best_path = config.output_dir / "best_params.json"
    reporting.write_json(best_path, {
        "params": best.params.to_dict(),
        "objective": best.objective,
        "per_task_delta": dict(best.per_task_delta),
        "trial_index": best.trial_index,
        # opaque pass-through for the external trainer's own settings
        "trainer": {},
    })
    _write_manifest(config, "tune", {
        "trials": args.trials,
        "tune_tasks": [t.id for t in tune_tasks],
        "holdout_tasks": [t.id for t in holdout],
        "baseline_scores": baseline,
        "best_trial_index": best.trial_index,
        "best_objective": best.objective,
    })
    logger.info("best objective %.3f at trial %d", best.objective, best.trial_index)
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    tasks = _load_tasks(config)
    if args.labels:
        if args.dataset is None:
            raise ConfigError("ablate --labels requires --dataset")
        if len(tasks) != 1:
            raise ConfigError("ablate --labels works on exactly one task")
        task = tasks[0]
        examples = load_examples_jsonl(args.dataset)
        dataset = SyntheticDataset(task_id=task.id, examples=tuple(examples),
                                   params=config.params)
        if not task.is_classification:
            raise ConfigError("label randomization requires a classification task")
        randomized = analysis.randomize_labels(dataset, task.labels,
                                               config.params.rng_seed)
        rand_task = analysis.randomize_demo_labels(task, config.params.rng_seed)
        task_dir = config.output_dir / task.id
        task_dir.mkdir(parents=True, exist_ok=True)
        dataset_path = task_dir / "randomized_dataset.jsonl"
        save_examples_jsonl(randomized.examples, dataset_path)
        task_path = task_dir / "randomized_task.json"
        reporting.write_json(task_path, rand_task.to_dict())
        _write_manifest(config, "ablate-labels", {
            "task_id": task.id,
            "randomized_dataset": str(dataset_path),
            "randomized_dataset_sha256": reporting.file_digest(dataset_path),
            "randomized_task": str(task_path),
        })
        return 0

    backend = build_backend(config)
    variants = list(analysis.AblationVariant)
    rows = []
    extra: dict[str, Any] = {"variants": [v.value for v in variants], "tasks": {}}
    for task in tasks:
        run = analysis.run_filter_ablation(task, config.params, backend, variants,
                                           config.filters)
        task_dir = config.output_dir / task.id
        task_dir.mkdir(parents=True, exist_ok=True)
        files = {}
        for variant, dataset in run.datasets.items():
            dataset_path = task_dir / f"ablation_{variant.value}.jsonl"
            save_examples_jsonl(dataset.examples, dataset_path)
            files[variant.value] = str(dataset_path)
        rows.append({
            "task_id": task.id,
            "measure": "kept_examples",
            **{v.value: len(run.datasets[v]) for v in variants},
        })
        extra["tasks"][task.id] = {
            "raw_digest": run.raw_digest,
            "counts": {v.value: run.datasets[v].created_counts.to_dict() for v in variants},
            "files": files,
        }
    manifest_path = _write_manifest(config, "ablate-filters", extra)
    reporting.write_ablation_report(
        rows, config.output_dir,
        manifest_hash=reporting.file_digest(manifest_path),
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    if not (args.scores or args.sensitivity or args.distribution):
        raise ConfigError("report needs at least one of --scores/--sensitivity/--distribution")
    figures = not args.no_figures
    config.output_dir.mkdir(parents=True, exist_ok=True)

    summary = None
    if args.scores is not None:
        rows = [
            reporting.ScoreRow(
                task_id=str(r["task_id"]),
                kind=_kind(r["kind"]),
                baseline=float(r["baseline"]),
                tuned=float(r["tuned"]),
            )
            for r in _rows(args.scores)
        ]
        summary = reporting.assemble_score_summary(rows)

    manifest_extra: dict[str, Any] = {
        "inputs": {
            name: reporting.file_digest(path)
            for name, path in (("scores", args.scores),
                               ("sensitivity", args.sensitivity),
                               ("distribution", args.distribution))
            if path is not None
        }
    }
    if summary is not None:
        manifest_extra["score_averages"] = {
            k: dict(v) for k, v in summary.averages.items()
        }
    manifest_path = _write_manifest(config, "report", manifest_extra)
    manifest_hash = reporting.file_digest(manifest_path)

    if summary is not None:
        reporting.write_score_report(
            summary, config.output_dir, manifest_hash=manifest_hash, figures=figures
        )

    if args.sensitivity is not None:
        reporting.write_sensitivity_report(
            _rows(args.sensitivity), config.output_dir,
            manifest_hash=manifest_hash, figures=figures,
        )

    if args.distribution is not None:
        dist_rows = []
        for record in _rows(args.distribution):
            task = TaskSpec(
                id=str(record["task_id"]),
                instruction="",
                kind=TaskKind.CLASSIFICATION,
                demonstrations=(),
                labels=tuple(str(x) for x in record["labels"]),
            )
            dist_rows.append(analysis.distribution_report(
                task,
                [str(x) for x in record["baseline_outputs"]],
                [str(x) for x in record["tuned_outputs"]],
                [str(x) for x in record["gold_outputs"]],
            ))
        reporting.write_distribution_report(
            dist_rows, config.output_dir,
            manifest_hash=manifest_hash, figures=figures,
        )

    if summary is not None:
        for kind, avg in manifest_extra["score_averages"].items():
            print(f"{kind}: baseline={avg['baseline']} tuned={avg['tuned']} "
                  f"delta={avg['delta']}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    if not config.task_paths:
        raise ConfigError("no task files configured (config key tasks or flag --task)")
    status = 0
    for path in config.task_paths:
        task = load_niv2_task(path, kind_override=config.task_kinds.get(Path(path).stem),
                              kind_threshold=config.kind_threshold)
        problems = validate_task(task)
        if problems:
            status = 1
            for problem in problems:
                print(f"{task.id}: {problem}")
        else:
            print(f"{task.id}: ok ({task.kind.value}, "
                  f"{len(task.demonstrations)} demonstrations)")
    return status


def _rows(path: Path) -> list[dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict) and isinstance(doc.get("rows"), list):
        return doc["rows"]
    raise ValueError(f"{path}: expected a JSON list or an object with a 'rows' list")


def _kind(value: str) -> TaskKind:
    try:
        return TaskKind(value)
    except ValueError:
        raise ValueError(
            f"task kind must be 'classification' or 'generation', got {value!r}"
        ) from None


if __name__ == "__main__":
    sys.exit(main())
