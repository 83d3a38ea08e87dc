"""Run configuration: documented JSON schema, strict unknown-key rejection,
and flag overrides applied last."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .backends import BackendConfig, GenerationBackend, HttpBackend, MockBackend
from .filtering import FilterConfig, load_noise_terms
from .prompts import ConjunctionVariant, DEFAULT_TEMPLATES, TemplateSet, load_template_overrides
from .tasks import DEFAULT_KIND_THRESHOLD, SynthesisParams, TaskKind
from .tuning import ParamSpace


class ConfigError(ValueError):
    """Raised for unknown keys, type mismatches, or unresolvable paths."""


_BACKEND_KEYS = {
    "kind": str,
    "endpoint_url": str,
    "api_key_env_var": str,
    "model_name": str,
    "request_timeout": (int, float),
    "max_retries": int,
    "max_parallel_requests": int,
    "mock_script": str,
}

_PARAMS_KEYS = {
    "n_raw_inputs": int,
    "input_temperature": (int, float),
    "output_temperature": (int, float),
    "repo_sample_size": int,
    "max_new_tokens_input": int,
    "max_new_tokens_output": int,
    "rng_seed": int,
}

_FILTERS_KEYS = {
    "noise_terms_file": str,
    "noise_terms": list,
    "enable_noise": bool,
    "enable_length": bool,
    "sigma_floor_fraction": (int, float),
    "sigma_floor_tokens": (int, float),
}

_SPACE_KEYS = {
    "input_temperature_range": list,
    "output_temperature_range": list,
    "n_raw_inputs_choices": list,
    "repo_sample_size_choices": list,
}

_TOP_KEYS = {
    "backend": dict,
    "params": dict,
    "filters": dict,
    "search_space": dict,
    "tasks": list,
    "task_kinds": dict,
    "kind_threshold": int,
    "output_dir": str,
    "template_dir": str,
    "prompt_variant": str,
    "context_budget_chars": int,
    "chars_per_token": (int, float),
}


@dataclass(frozen=True)
class RunConfig:
    backend_kind: str = "mock"
    backend: BackendConfig = field(default_factory=BackendConfig)
    mock_script: Path | None = None
    params: SynthesisParams = field(default_factory=SynthesisParams)
    filters: FilterConfig = field(default_factory=FilterConfig.default)
    search_space: ParamSpace = field(default_factory=ParamSpace)
    task_paths: tuple[Path, ...] = ()
    task_kinds: Mapping[str, TaskKind] = field(default_factory=dict)
    kind_threshold: int = DEFAULT_KIND_THRESHOLD
    output_dir: Path = Path("runs")
    template_dir: Path | None = None
    prompt_variant: ConjunctionVariant = ConjunctionVariant.EQUALS_NEWLINE
    context_budget_chars: int = 16384
    chars_per_token: float = 4.0

    @property
    def templates(self) -> TemplateSet:
        if self.template_dir is None:
            return DEFAULT_TEMPLATES
        return load_template_overrides(self.template_dir)

    def to_dict(self) -> dict:
        """Manifest-friendly snapshot; carries no secrets, only the name of
        the API-key environment variable."""
        return {
            "backend": {
                "kind": self.backend_kind,
                "endpoint_url": self.backend.endpoint_url,
                "api_key_env_var": self.backend.api_key_env_var,
                "model_name": self.backend.model_name,
                "request_timeout": self.backend.request_timeout,
                "max_retries": self.backend.max_retries,
                "max_parallel_requests": self.backend.max_parallel_requests,
                "mock_script": str(self.mock_script) if self.mock_script else None,
            },
            "params": self.params.to_dict(),
            "filters": self.filters.to_dict(),
            "search_space": self.search_space.to_dict(),
            "tasks": [str(p) for p in self.task_paths],
            "task_kinds": {k: v.value for k, v in self.task_kinds.items()},
            "kind_threshold": self.kind_threshold,
            "output_dir": str(self.output_dir),
            "template_dir": str(self.template_dir) if self.template_dir else None,
            "prompt_variant": self.prompt_variant.cli_name,
            "context_budget_chars": self.context_budget_chars,
            "chars_per_token": self.chars_per_token,
        }


def _check_keys(section: Mapping, schema: Mapping[str, Any], prefix: str) -> None:
    for key, value in section.items():
        if key not in schema:
            raise ConfigError(f"unknown config key: {prefix}{key}")
        expected = schema[key]
        allowed = expected if isinstance(expected, tuple) else (expected,)
        # bool subclasses int; only accept it where bool is explicitly allowed
        ok = isinstance(value, allowed) and not (
            isinstance(value, bool) and bool not in allowed
        )
        if not ok:
            name = "/".join(t.__name__ for t in allowed)
            raise ConfigError(
                f"config key {prefix}{key}: expected {name}, got {type(value).__name__}"
            )


def _pair(value: list, path: str) -> tuple[float, float]:
    if len(value) != 2 or not all(isinstance(v, (int, float)) for v in value):
        raise ConfigError(f"config key {path}: expected [low, high]")
    return float(value[0]), float(value[1])


def parse_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
    base_dir: Path | None = None,
) -> RunConfig:
    """Load and validate a JSON config file, then apply flag overrides.

    ``overrides`` maps section name to key/value pairs and wins over the file;
    unknown keys and type mismatches are rejected with the offending path.
    Relative paths resolve against the config file's directory.
    """
    doc: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must contain a JSON object")
        if base_dir is None:
            base_dir = path.parent
    base_dir = base_dir or Path.cwd()

    for section, values in (overrides or {}).items():
        if section not in _TOP_KEYS:
            raise ConfigError(f"unknown config key: {section}")
        if isinstance(values, Mapping):
            doc.setdefault(section, {})
            if not isinstance(doc[section], dict):
                raise ConfigError(f"config key {section}: expected object")
            doc[section].update(values)
        else:
            doc[section] = values

    _check_keys(doc, _TOP_KEYS, "")

    backend_doc = doc.get("backend", {})
    _check_keys(backend_doc, _BACKEND_KEYS, "backend.")
    backend = BackendConfig(
        endpoint_url=backend_doc.get("endpoint_url", ""),
        api_key_env_var=backend_doc.get("api_key_env_var", "LLM_API_KEY"),
        model_name=backend_doc.get("model_name", ""),
        request_timeout=float(backend_doc.get("request_timeout", 60.0)),
        max_retries=backend_doc.get("max_retries", 2),
        max_parallel_requests=backend_doc.get("max_parallel_requests", 4),
    )
    backend_kind = backend_doc.get("kind", "http" if backend.endpoint_url else "mock")
    if backend_kind not in ("http", "mock"):
        raise ConfigError(f"config key backend.kind: expected 'http' or 'mock', got {backend_kind!r}")
    if backend_kind == "http" and not backend.endpoint_url:
        raise ConfigError("config key backend.endpoint_url: required for the http backend")
    mock_script = None
    if backend_doc.get("mock_script"):
        mock_script = _resolve(base_dir, backend_doc["mock_script"])
        if not mock_script.exists():
            raise ConfigError(f"config key backend.mock_script: file not found: {mock_script}")

    params_doc = doc.get("params", {})
    _check_keys(params_doc, _PARAMS_KEYS, "params.")
    try:
        params = SynthesisParams(**params_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config section params: {exc}") from exc

    filters_doc = doc.get("filters", {})
    _check_keys(filters_doc, _FILTERS_KEYS, "filters.")
    noise_terms: tuple[str, ...]
    if "noise_terms" in filters_doc:
        noise_terms = tuple(str(t) for t in filters_doc["noise_terms"])
    elif "noise_terms_file" in filters_doc:
        noise_file = _resolve(base_dir, filters_doc["noise_terms_file"])
        if not noise_file.exists():
            raise ConfigError(f"config key filters.noise_terms_file: file not found: {noise_file}")
        noise_terms = tuple(load_noise_terms(noise_file))
    else:
        noise_terms = tuple(load_noise_terms())
    try:
        filters = FilterConfig(
            noise_terms=noise_terms,
            enable_noise=filters_doc.get("enable_noise", True),
            enable_length=filters_doc.get("enable_length", True),
            sigma_floor_fraction=float(filters_doc.get("sigma_floor_fraction", 0.05)),
            sigma_floor_tokens=float(filters_doc.get("sigma_floor_tokens", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"config section filters: {exc}") from exc

    space_doc = doc.get("search_space", {})
    _check_keys(space_doc, _SPACE_KEYS, "search_space.")
    space_kwargs: dict[str, Any] = {}
    if "input_temperature_range" in space_doc:
        space_kwargs["input_temperature_range"] = _pair(
            space_doc["input_temperature_range"], "search_space.input_temperature_range"
        )
    if "output_temperature_range" in space_doc:
        space_kwargs["output_temperature_range"] = _pair(
            space_doc["output_temperature_range"], "search_space.output_temperature_range"
        )
    for key in ("n_raw_inputs_choices", "repo_sample_size_choices"):
        if key in space_doc:
            values = space_doc[key]
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
                raise ConfigError(f"config key search_space.{key}: expected a list of integers")
            space_kwargs[key] = tuple(values)
    try:
        search_space = ParamSpace(**space_kwargs)
    except ValueError as exc:
        raise ConfigError(f"config section search_space: {exc}") from exc

    task_paths = []
    for entry in doc.get("tasks", []):
        if not isinstance(entry, str):
            raise ConfigError("config key tasks: expected a list of file paths")
        task_path = _resolve(base_dir, entry)
        if not task_path.exists():
            raise ConfigError(f"config key tasks: file not found: {task_path}")
        task_paths.append(task_path)

    task_kinds: dict[str, TaskKind] = {}
    for task_id, kind_name in doc.get("task_kinds", {}).items():
        try:
            task_kinds[str(task_id)] = TaskKind(kind_name)
        except ValueError:
            raise ConfigError(
                f"config key task_kinds.{task_id}: expected 'classification' or "
                f"'generation', got {kind_name!r}"
            ) from None

    template_dir = None
    if doc.get("template_dir"):
        template_dir = _resolve(base_dir, doc["template_dir"])
        if not template_dir.is_dir():
            raise ConfigError(f"config key template_dir: directory not found: {template_dir}")

    try:
        prompt_variant = ConjunctionVariant.from_name(
            doc.get("prompt_variant", "equals-newline")
        )
    except ValueError as exc:
        raise ConfigError(f"config key prompt_variant: {exc}") from exc

    return RunConfig(
        backend_kind=backend_kind,
        backend=backend,
        mock_script=mock_script,
        params=params,
        filters=filters,
        search_space=search_space,
        task_paths=tuple(task_paths),
        task_kinds=task_kinds,
        kind_threshold=doc.get("kind_threshold", DEFAULT_KIND_THRESHOLD),
        output_dir=Path(doc.get("output_dir", "runs")),
        template_dir=template_dir,
        prompt_variant=prompt_variant,
        context_budget_chars=doc.get("context_budget_chars", 16384),
        chars_per_token=float(doc.get("chars_per_token", 4.0)),
    )


def _resolve(base_dir: Path, value: str) -> Path:
    candidate = Path(value)
    return candidate if candidate.is_absolute() else base_dir / candidate


def build_backend(config: RunConfig) -> GenerationBackend:
    """Instantiate the configured backend (mock script rules or HTTP)."""
    if config.backend_kind == "mock":
        script = None
        if config.mock_script is not None:
            doc = json.loads(config.mock_script.read_text(encoding="utf-8"))
            rules = doc.get("rules", []) if isinstance(doc, dict) else []
            script = {str(r["contains"]): str(r["response"]) for r in rules}
        return MockBackend(script=script, config=config.backend)
    return HttpBackend(config.backend)


def with_params(config: RunConfig, params: SynthesisParams) -> RunConfig:
    return replace(config, params=params)
