"""Prompt rendering for input generation and output annotation.

The three embedded templates are the canonical prompt surfaces; rendering is
pure slot substitution so equal arguments always produce byte-identical
prompts.  An override directory may supply replacement templates using the
same slot names.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .tasks import Example, TaskSpec

INPUT_GENERATION_TEMPLATE = """As an InputGenerator, your task is to generate
a new [input] based on the [instruction] and
some example [input].

Try your best to ensure that the new [input]
you generate is distinct from the provided
[input] while maintaining a diverse, detailed,
precise, comprehensive, and high-quality response.

Avoid generating a new [input] that is the
same as the provided [input].

[instruction]

{instruction}

Here are some high-quality [input] for the
[instruction]. These [input] can provide
you with very strict format requirements.
You should pay extreme attention to them!!!

Some high-quality [input]:

{high_quality_input_string}

These are some additional [input]. Their
formats and contents may not be accurate.
However, you may also refer to the content
of them.

Some low-quality [input]:

{low_quality_input_string}

After seeing example inputs, generate a new
[input]. Before generating the new [input],
ensure that you strictly adhere to the rules
of the new [instruction] and follow the
format of high-quality [input].

Prioritize the new [instruction] guidelines
to maintain consistency and quality.

Think twice before generating a new [input].
Only response the new [input] without any
other information.

[input]="""

INPUT_CLASSIFICATION_TEMPLATE = """As an InputGenerator, your task is to generate
a new [input] based on the [instruction] and
some example [input].

Try your best to ensure that the new [input]
you generate is distinct from the provided
[input] while maintaining a diverse, detailed,
precise, comprehensive, and high-quality response.

Avoid generating a new [input] that is the
same as the provided [input].

[instruction]

{instruction}

Here are some high-quality [input] for the
[instruction]. These [input] can provide
you with very strict format requirements.
You should pay extreme attention to them!!!

Some high-quality [input]:

{high_quality_input_string}

These are some additional [input]. Their
formats and contents may not be accurate.
However, you may also refer to the content of them.

Some low-quality [input]:

{low_quality_input_string}

After seeing example inputs, generate
a new [input] for which the expected
[output] is {conditional_label}. Before
generating the new [input], ensure that
you strictly adhere to the rules of the
new [instruction] and follow the format
of high-quality [input].

Prioritize the new [instruction] guidelines
to maintain consistency and quality.

Think twice before generating a new [input].
Only response the new [input] without any
other information. Note that the expected
[output] for the new [input] should be
{conditional_label}.

[input]="""

_ANNOTATION_HEADER = """A chat between a curious user and an
artificial intelligence assistant.
The assistant gives concise answers
to the user's questions.
USER: The artificial intelligence
assistant only needs to
help annotate label.
The task is: {instruction}
ASSISTANT: Okay.
"""

# Demonstration turns carry a space between "USER :" / "ASSISTANT :" and the
# colon; the final query turn does not.  The conjunction sits between
# "USER : [input] " and the example input.
_DEMO_TURN = "USER : [input] {conjunction}{input}\nASSISTANT : {output}\n"
_FINAL_TURN = "USER: [input] =\n{new_input}\nASSISTANT:"

ANNOTATION_TEMPLATE = (
    _ANNOTATION_HEADER
    + "USER : [input] =\n{input_1}\nASSISTANT : {output_1}\n"
    + "USER : [input] =\n{input_2}\nASSISTANT : {output_2}\n"
    + "USER : [input] =\n{input_3}\nASSISTANT : {output_3}\n"
    + _FINAL_TURN
)

INPUT_BLOCK_PREFIX = "[input]=\n"


class PromptTemplateId(str, Enum):
    INPUT_GEN_FOR_GENERATION = "input_generation"
    INPUT_GEN_FOR_CLASSIFICATION = "input_generation_classification"
    OUTPUT_ANNOTATION = "output_annotation"


class ConjunctionVariant(str, Enum):
    """Separator between "USER : [input]" and the turn's input text."""

    EQUALS_NEWLINE = "=\n"
    COLON = ":"
    DOUBLE_NEWLINE = "\n\n"

    @classmethod
    def from_name(cls, name: str) -> "ConjunctionVariant":
        table = {
            "equals-newline": cls.EQUALS_NEWLINE,
            "colon": cls.COLON,
            "double-newline": cls.DOUBLE_NEWLINE,
        }
        try:
            return table[name]
        except KeyError:
            raise ValueError(
                f"unknown conjunction variant {name!r}; choose from {sorted(table)}"
            ) from None

    @property
    def cli_name(self) -> str:
        return {
            ConjunctionVariant.EQUALS_NEWLINE: "equals-newline",
            ConjunctionVariant.COLON: "colon",
            ConjunctionVariant.DOUBLE_NEWLINE: "double-newline",
        }[self]


@dataclass(frozen=True)
class TemplateSet:
    """The three template strings used by the renderers."""

    input_generation: str = INPUT_GENERATION_TEMPLATE
    input_classification: str = INPUT_CLASSIFICATION_TEMPLATE
    output_annotation: str = ANNOTATION_TEMPLATE

    def get(self, template_id: PromptTemplateId) -> str:
        return {
            PromptTemplateId.INPUT_GEN_FOR_GENERATION: self.input_generation,
            PromptTemplateId.INPUT_GEN_FOR_CLASSIFICATION: self.input_classification,
            PromptTemplateId.OUTPUT_ANNOTATION: self.output_annotation,
        }[template_id]


DEFAULT_TEMPLATES = TemplateSet()


def load_template_overrides(directory: str | Path) -> TemplateSet:
    """Build a TemplateSet from override files in ``directory``.

    Files are named after the template ids (``input_generation.txt`` etc.);
    missing files fall back to the embedded templates.  One trailing newline
    is dropped because most editors append it.
    """
    directory = Path(directory)
    values = {}
    for template_id, attr in (
        (PromptTemplateId.INPUT_GEN_FOR_GENERATION, "input_generation"),
        (PromptTemplateId.INPUT_GEN_FOR_CLASSIFICATION, "input_classification"),
        (PromptTemplateId.OUTPUT_ANNOTATION, "output_annotation"),
    ):
        candidate = directory / f"{template_id.value}.txt"
        if candidate.exists():
            text = candidate.read_text(encoding="utf-8")
            if text.endswith("\n"):
                text = text[:-1]
            values[attr] = text
    return TemplateSet(**values)


def template_digest(
    template_id: PromptTemplateId, templates: TemplateSet = DEFAULT_TEMPLATES
) -> str:
    """Stable content hash of a stored template; guards drift in tests."""
    return hashlib.sha256(templates.get(template_id).encode("utf-8")).hexdigest()


def all_template_digests(templates: TemplateSet = DEFAULT_TEMPLATES) -> dict[str, str]:
    return {tid.value: template_digest(tid, templates) for tid in PromptTemplateId}


def join_input_blocks(inputs: Sequence[str]) -> str:
    """Render example inputs as "[input]=" blocks separated by a blank line."""
    return "\n\n".join(INPUT_BLOCK_PREFIX + text for text in inputs)


def render_input_prompt(
    task: TaskSpec,
    high_quality_inputs: Sequence[str],
    low_quality_inputs: Sequence[str],
    conditional_label: str | None = None,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> str:
    """Render the input-generation prompt for one backend call.

    Classification tasks require ``conditional_label`` (a member of the task's
    label set); generation tasks must not pass one.  An empty low-quality pool
    renders as an empty slot, keeping the surrounding prose intact.
    """
    if not high_quality_inputs:
        raise ValueError("high_quality_inputs must be non-empty")
    if task.is_classification:
        if conditional_label is None:
            raise ValueError("classification tasks require a conditional_label")
        if conditional_label not in task.labels:
            raise ValueError(
                f"conditional_label {conditional_label!r} not in task labels {task.labels}"
            )
        return templates.input_classification.format(
            instruction=task.instruction,
            high_quality_input_string=join_input_blocks(high_quality_inputs),
            low_quality_input_string=join_input_blocks(low_quality_inputs),
            conditional_label=conditional_label,
        )
    if conditional_label is not None:
        raise ValueError("generation tasks take no conditional_label")
    return templates.input_generation.format(
        instruction=task.instruction,
        high_quality_input_string=join_input_blocks(high_quality_inputs),
        low_quality_input_string=join_input_blocks(low_quality_inputs),
    )


def render_chat_prompt(
    instruction: str,
    demonstrations: Sequence[Example],
    new_input: str,
    variant: ConjunctionVariant = ConjunctionVariant.EQUALS_NEWLINE,
) -> str:
    """Multi-turn annotation prompt over an arbitrary demonstration list.

    The conjunction variant only disturbs the demonstration turns; the final
    query turn always keeps the canonical "=\\n" join.
    """
    if not demonstrations:
        raise ValueError("at least one demonstration is required")
    if not new_input:
        raise ValueError("new_input must be non-empty")
    parts = [_ANNOTATION_HEADER.format(instruction=instruction)]
    for demo in demonstrations:
        parts.append(
            _DEMO_TURN.format(
                conjunction=variant.value, input=demo.input, output=demo.output
            )
        )
    parts.append(_FINAL_TURN.format(new_input=new_input))
    return "".join(parts)


def render_annotation_prompt(
    task: TaskSpec,
    new_input: str,
    variant: ConjunctionVariant = ConjunctionVariant.EQUALS_NEWLINE,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> str:
    """Annotation prompt over the task's seed demonstrations.

    With three demonstrations and the default conjunction this is exactly the
    stored annotation template with its slots substituted; with fewer
    demonstrations the unused turns are omitted.  A custom annotation template
    (override directory) is rendered by straight slot substitution instead:
    missing demonstration slots become empty strings.
    """
    if templates.output_annotation != ANNOTATION_TEMPLATE:
        if not task.demonstrations:
            raise ValueError("at least one demonstration is required")
        if not new_input:
            raise ValueError("new_input must be non-empty")
        slots: dict[str, str] = {"instruction": task.instruction, "new_input": new_input}
        for i in range(3):
            demo = task.demonstrations[i] if i < len(task.demonstrations) else None
            slots[f"input_{i + 1}"] = demo.input if demo else ""
            slots[f"output_{i + 1}"] = demo.output if demo else ""
        return templates.output_annotation.format(**slots)
    return render_chat_prompt(task.instruction, task.demonstrations, new_input, variant)
