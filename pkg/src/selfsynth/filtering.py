"""Rule-based quality gates: noise-term rejection and length-band rejection.

Two rounds run in the pipeline: one over generated inputs, one over annotated
input-output pairs.  Both are pure partitions of their argument, and each can
be disabled independently for ablation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

from .tasks import Example

DEFAULT_SIGMA_FLOOR_FRACTION = 0.05
DEFAULT_SIGMA_FLOOR_TOKENS = 1.0


def token_count(text: str) -> int:
    """Length in whitespace-delimited tokens."""
    return len(text.split())


def load_noise_terms(path: str | Path | None = None) -> list[str]:
    """Load noise terms, one per line; '#' lines are comments.

    Without a path the packaged default list is used.
    """
    if path is None:
        raw = (
            resources.files("selfsynth").joinpath("data/noise_terms.txt").read_text("utf-8")
        )
    else:
        raw = Path(path).read_text(encoding="utf-8")
    terms = []
    for line in raw.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            terms.append(stripped)
    return terms


@dataclass(frozen=True)
class FilterConfig:
    noise_terms: tuple[str, ...] = ()
    enable_noise: bool = True
    enable_length: bool = True
    sigma_floor_fraction: float = DEFAULT_SIGMA_FLOOR_FRACTION
    sigma_floor_tokens: float = DEFAULT_SIGMA_FLOOR_TOKENS

    def __post_init__(self) -> None:
        object.__setattr__(self, "noise_terms", tuple(self.noise_terms))
        if self.enable_noise and not self.noise_terms:
            raise ValueError("enable_noise requires a non-empty noise term list")

    @classmethod
    def default(cls, **overrides) -> "FilterConfig":
        overrides.setdefault("noise_terms", tuple(load_noise_terms()))
        return cls(**overrides)

    def to_dict(self) -> dict:
        return {
            "noise_terms": list(self.noise_terms),
            "enable_noise": self.enable_noise,
            "enable_length": self.enable_length,
            "sigma_floor_fraction": self.sigma_floor_fraction,
            "sigma_floor_tokens": self.sigma_floor_tokens,
        }


@dataclass(frozen=True)
class LengthStats:
    """Token-length mean/deviation of the demonstrations, per field."""

    mu_input: float
    sigma_input: float
    mu_output: float
    sigma_output: float

    def effective_sigma(self, mu: float, sigma: float, config: FilterConfig) -> float:
        return max(sigma, config.sigma_floor_fraction * mu, config.sigma_floor_tokens)

    def input_band(self, config: FilterConfig) -> tuple[float, float]:
        s = self.effective_sigma(self.mu_input, self.sigma_input, config)
        return (self.mu_input - 2 * s, self.mu_input + 2 * s)

    def output_band(self, config: FilterConfig) -> tuple[float, float]:
        s = self.effective_sigma(self.mu_output, self.sigma_output, config)
        return (self.mu_output - 2 * s, self.mu_output + 2 * s)


class LengthSide(Enum):
    INPUT_ONLY = "input_only"
    BOTH = "both"


@dataclass(frozen=True)
class Rejection:
    item: str
    reason: str
    stage: str = ""

    def to_dict(self) -> dict:
        return {"stage": self.stage, "reason": self.reason, "item": self.item}


def compute_length_stats(demonstrations: Sequence[Example]) -> LengthStats:
    """Population mean/standard deviation of demonstration token counts."""
    if not demonstrations:
        raise ValueError("need at least one demonstration")
    input_lengths = [token_count(d.input) for d in demonstrations]
    output_lengths = [token_count(d.output) for d in demonstrations]
    mu_in, sigma_in = _population_stats(input_lengths)
    mu_out, sigma_out = _population_stats(output_lengths)
    return LengthStats(mu_in, sigma_in, mu_out, sigma_out)


def _population_stats(values: Sequence[int]) -> tuple[float, float]:
    n = len(values)
    mu = sum(values) / n
    variance = sum((v - mu) ** 2 for v in values) / n
    return mu, math.sqrt(variance)


def noise_check(text: str, config: FilterConfig) -> str | None:
    """Return the first matched noise term, or None to keep.

    Matching is a case-insensitive substring test over the configured list.
    """
    haystack = text.casefold()
    for term in config.noise_terms:
        if term.casefold() in haystack:
            return term
    return None


def length_check(
    example: Example | str,
    stats: LengthStats,
    config: FilterConfig,
    side: LengthSide = LengthSide.BOTH,
) -> str | None:
    """Return a rejection reason unless every checked field lies strictly
    inside its (mu - 2*sigma_eff, mu + 2*sigma_eff) band."""
    if isinstance(example, str):
        input_text, output_text = example, None
    else:
        input_text = example.input
        output_text = example.output if side is LengthSide.BOTH else None

    lo, hi = stats.input_band(config)
    n = token_count(input_text)
    if not lo < n < hi:
        return f"input length {n} outside ({lo:.2f}, {hi:.2f})"
    if output_text is not None:
        lo, hi = stats.output_band(config)
        n = token_count(output_text)
        if not lo < n < hi:
            return f"output length {n} outside ({lo:.2f}, {hi:.2f})"
    return None


def filter_inputs(
    inputs: Sequence[str], stats: LengthStats, config: FilterConfig
) -> tuple[list[str], list[Rejection]]:
    """Partition generated inputs into kept and rejected-with-reason."""
    kept: list[str] = []
    rejected: list[Rejection] = []
    for text in inputs:
        reason = _check_text(text, stats, config)
        if reason is None:
            kept.append(text)
        else:
            rejected.append(Rejection(item=text, reason=reason, stage="input"))
    return kept, rejected


def filter_pairs(
    examples: Sequence[Example], stats: LengthStats, config: FilterConfig
) -> tuple[list[Example], list[Rejection]]:
    """Partition annotated pairs; noise is checked on both fields and lengths
    on both bands."""
    kept: list[Example] = []
    rejected: list[Rejection] = []
    for example in examples:
        reason = None
        if config.enable_noise:
            term = noise_check(example.input, config)
            if term is not None:
                reason = f"noise term {term!r} in input"
            else:
                term = noise_check(example.output, config)
                if term is not None:
                    reason = f"noise term {term!r} in output"
        if reason is None and config.enable_length:
            reason = length_check(example, stats, config, LengthSide.BOTH)
        if reason is None:
            kept.append(example)
        else:
            rejected.append(Rejection(item=example.input, reason=reason, stage="pair"))
    return kept, rejected


def _check_text(text: str, stats: LengthStats, config: FilterConfig) -> str | None:
    if config.enable_noise:
        term = noise_check(text, config)
        if term is not None:
            return f"noise term {term!r} in input"
    if config.enable_length:
        return length_check(text, stats, config, LengthSide.INPUT_ONLY)
    return None
