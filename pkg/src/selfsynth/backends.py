"""Generation backends: a chat-completion HTTP client and a deterministic
offline mock, plus the finetuning-file exporter consumed by an external
trainer."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

import requests

from .prompts import ConjunctionVariant, render_annotation_prompt
from .tasks import SyntheticDataset, TaskSpec

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class BackendRequestError(RuntimeError):
    """HTTP-level failure carrying the status code and a body excerpt."""

    def __init__(self, status: int, body: str):
        self.status = status
        self.body_excerpt = body[:500]
        super().__init__(f"backend returned HTTP {status}: {self.body_excerpt}")


class FinishReason(str, Enum):
    STOP = "stop"
    LENGTH = "length"
    ERROR = "error"


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float = 0.0
    max_new_tokens: int = 256
    stop_sequences: tuple[str, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "stop_sequences", tuple(self.stop_sequences))
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    finish_reason: FinishReason = FinishReason.STOP


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str = ""
    api_key_env_var: str = "LLM_API_KEY"
    model_name: str = ""
    request_timeout: float = 60.0
    max_retries: int = 2
    max_parallel_requests: int = 4

    def __post_init__(self) -> None:
        if self.max_parallel_requests < 1:
            raise ValueError("max_parallel_requests must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class GenerationBackend(ABC):
    """Uniform generation interface; handles are safe to share across
    threads."""

    def __init__(self, config: BackendConfig | None = None):
        self.config = config or BackendConfig()

    @abstractmethod
    def generate(self, request: GenerationRequest) -> GenerationResponse:
        ...

    def batch_generate(
        self, requests_: Sequence[GenerationRequest]
    ) -> list[GenerationResponse]:
        """Positionally aligned responses; concurrency bounded by the config
        and per-item failures isolated as Error responses."""
        if not requests_:
            return []
        workers = min(self.config.max_parallel_requests, len(requests_))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self._generate_safe, requests_))

    def _generate_safe(self, request: GenerationRequest) -> GenerationResponse:
        try:
            return self.generate(request)
        except Exception as exc:
            logger.warning("generation failed, isolating as Error response: %s", exc)
            return GenerationResponse(text="", finish_reason=FinishReason.ERROR)


def apply_stop_sequences(text: str, stop_sequences: Sequence[str]) -> str:
    """Truncate at the earliest occurrence of any stop sequence."""
    cut = len(text)
    for stop in stop_sequences:
        idx = text.find(stop)
        if idx != -1:
            cut = min(cut, idx)
    return text[:cut]


def _stable_hash(prompt: str, seed: int | None) -> int:
    digest = hashlib.sha256(f"{seed}\x00{prompt}".encode("utf-8")).hexdigest()
    return int(digest[:12], 16)


def contextual_echo(prompt: str, seed: int | None) -> str:
    """Default mock behavior: fabricate in-distribution text from the prompt.

    Input-generation prompts get a variation of one of the embedded
    high-quality example inputs (same token count, so length filters behave
    realistically); annotation prompts echo one of the demonstration outputs.
    """
    h = _stable_hash(prompt, seed)
    if prompt.startswith("As an InputGenerator"):
        candidates = _extract_input_blocks(prompt)
        if candidates:
            tokens = candidates[h % len(candidates)].split()
            if tokens:
                tokens[-1] = f"v{h % 9973}"
                return " ".join(tokens)
        return f"synthetic input {h % 9973}"
    if prompt.startswith("A chat between"):
        outputs = [
            line[len("ASSISTANT : "):]
            for line in prompt.splitlines()
            if line.startswith("ASSISTANT : ")
        ]
        if outputs:
            return outputs[h % len(outputs)]
        return f"annotation {h % 9973}"
    return f"response {h % 9973}"


def _extract_input_blocks(prompt: str) -> list[str]:
    marker = "Some high-quality [input]:\n\n"
    start = prompt.find(marker)
    if start == -1:
        return []
    end = prompt.find("\n\nThese are some additional", start)
    section = prompt[start + len(marker): end if end != -1 else len(prompt)]
    blocks = [b for b in section.split("[input]=\n") if b.strip()]
    return [b.strip("\n") for b in blocks]


Responder = Callable[[str, "int | None"], str]


class MockBackend(GenerationBackend):
    """Deterministic offline backend: a pure function of (prompt, seed).

    ``script`` may be a mapping of prompt substrings to fixed responses
    (first match wins, insertion order), or a callable ``(prompt, seed) ->
    text``.  Unmatched prompts fall back to :func:`contextual_echo`.
    """

    def __init__(
        self,
        script: Mapping[str, str] | Responder | None = None,
        config: BackendConfig | None = None,
    ):
        super().__init__(config)
        self._rules: tuple[tuple[str, str], ...] = ()
        self._responder: Responder = contextual_echo
        if callable(script):
            self._responder = script
        elif script is not None:
            self._rules = tuple(script.items())

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        text = None
        for needle, response in self._rules:
            if needle in request.prompt:
                text = response
                break
        if text is None:
            text = self._responder(request.prompt, request.seed)
        text = apply_stop_sequences(text, request.stop_sequences)
        tokens = text.split()
        if len(tokens) > request.max_new_tokens:
            return GenerationResponse(
                " ".join(tokens[: request.max_new_tokens]), FinishReason.LENGTH
            )
        return GenerationResponse(text, FinishReason.STOP)


class HttpBackend(GenerationBackend):
    """Client for any endpoint speaking the de-facto chat-completion JSON
    schema (model, messages, temperature, max_tokens, stop).

    The prompt travels as a single user message; credentials come only from
    the environment variable named in the config.  Network failures retry
    with exponential backoff and finally yield an Error response; non-2xx
    statuses raise :class:`BackendRequestError`.
    """

    def __init__(
        self,
        config: BackendConfig,
        session: requests.Session | None = None,
        retry_backoff_base: float = 0.5,
    ):
        super().__init__(config)
        if not config.endpoint_url:
            raise ValueError("HttpBackend requires a non-empty endpoint_url")
        self._session = session or requests.Session()
        self._backoff_base = retry_backoff_base

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env_var, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _payload(self, request: GenerationRequest) -> dict:
        payload: dict = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_new_tokens,
        }
        if request.stop_sequences:
            payload["stop"] = list(request.stop_sequences)
        if request.seed is not None:
            payload["seed"] = request.seed
        return payload

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        payload = self._payload(request)
        logger.debug("request payload: %s", json.dumps(payload, ensure_ascii=False))
        attempts = self.config.max_retries + 1
        last_status: tuple[int, str] | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self._backoff_base * 2 ** (attempt - 1))
            try:
                response = self._session.post(
                    self.config.endpoint_url,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.request_timeout,
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                logger.warning(
                    "attempt %d/%d failed: %s", attempt + 1, attempts, exc
                )
                continue
            if response.status_code in RETRYABLE_STATUS:
                last_status = (response.status_code, response.text)
                logger.warning(
                    "attempt %d/%d got HTTP %d",
                    attempt + 1,
                    attempts,
                    response.status_code,
                )
                continue
            if not 200 <= response.status_code < 300:
                raise BackendRequestError(response.status_code, response.text)
            return self._parse(response)
        if last_status is not None:
            raise BackendRequestError(*last_status)
        return GenerationResponse(text="", finish_reason=FinishReason.ERROR)

    def _parse(self, response: requests.Response) -> GenerationResponse:
        logger.debug("response body: %s", response.text[:2000])
        try:
            doc = response.json()
            choice = doc["choices"][0]
            text = choice["message"]["content"] or ""
            reason = choice.get("finish_reason", "stop")
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendRequestError(
                response.status_code, f"unparseable completion body: {response.text}"
            ) from exc
        finish = FinishReason.LENGTH if reason == "length" else FinishReason.STOP
        return GenerationResponse(text=text, finish_reason=finish)


def export_finetune_dataset(
    task: TaskSpec,
    dataset: SyntheticDataset,
    variant: ConjunctionVariant,
    path: str | Path,
) -> int:
    """Write the trainer-facing JSON Lines file of prompt/completion records.

    Each prompt is the full annotation prompt for the example's input and the
    completion is the example's output; bytes are stable for equal inputs.
    """
    if not dataset.examples:
        raise ValueError("cannot export an empty dataset")
    lines = []
    for example in dataset.examples:
        record = {
            "prompt": render_annotation_prompt(task, example.input, variant),
            "completion": example.output,
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(lines)
