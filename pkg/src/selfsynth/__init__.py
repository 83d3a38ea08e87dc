"""Self-synthesized task-specific training data: generation, filtering,
annotation, evaluation, and tuning against any chat-completion backend."""

from .analysis import (
    AblationVariant,
    build_self_icl_prompt,
    distribution_report,
    prompt_sensitivity_sweep,
    randomize_demo_labels,
    randomize_labels,
    run_filter_ablation,
)
from .backends import (
    BackendConfig,
    BackendRequestError,
    FinishReason,
    GenerationBackend,
    GenerationRequest,
    GenerationResponse,
    HttpBackend,
    MockBackend,
    export_finetune_dataset,
)
from .filtering import (
    FilterConfig,
    LengthStats,
    compute_length_stats,
    filter_inputs,
    filter_pairs,
    length_check,
    noise_check,
)
from .metrics import (
    EvalResult,
    LabelDistribution,
    evaluate_task,
    exact_match,
    irrelevant_ratio,
    l1_distance,
    label_distribution,
    lcs_length,
    rouge_l,
)
from .prompts import (
    ConjunctionVariant,
    PromptTemplateId,
    render_annotation_prompt,
    render_input_prompt,
    template_digest,
)
from .synthesis import (
    EmptyDatasetError,
    InputRepository,
    annotate_outputs,
    generate_inputs,
    parse_generated_input,
    run_pipeline,
)
from .tasks import (
    Example,
    Provenance,
    SyntheticDataset,
    SynthesisParams,
    TaskKind,
    TaskSpec,
    load_niv2_task,
    select_demonstrations,
    validate_task,
)
from .tuning import ParamSpace, TrialRecord, objective, random_search

__version__ = "0.1.0"

__all__ = [
    "AblationVariant",
    "BackendConfig",
    "BackendRequestError",
    "ConjunctionVariant",
    "EmptyDatasetError",
    "EvalResult",
    "Example",
    "FilterConfig",
    "FinishReason",
    "GenerationBackend",
    "GenerationRequest",
    "GenerationResponse",
    "HttpBackend",
    "InputRepository",
    "LabelDistribution",
    "LengthStats",
    "MockBackend",
    "ParamSpace",
    "PromptTemplateId",
    "Provenance",
    "SyntheticDataset",
    "SynthesisParams",
    "TaskKind",
    "TaskSpec",
    "TrialRecord",
    "annotate_outputs",
    "build_self_icl_prompt",
    "compute_length_stats",
    "distribution_report",
    "evaluate_task",
    "exact_match",
    "export_finetune_dataset",
    "filter_inputs",
    "filter_pairs",
    "generate_inputs",
    "irrelevant_ratio",
    "l1_distance",
    "label_distribution",
    "lcs_length",
    "length_check",
    "load_niv2_task",
    "noise_check",
    "objective",
    "parse_generated_input",
    "prompt_sensitivity_sweep",
    "random_search",
    "randomize_demo_labels",
    "randomize_labels",
    "render_annotation_prompt",
    "render_input_prompt",
    "rouge_l",
    "run_filter_ablation",
    "run_pipeline",
    "select_demonstrations",
    "template_digest",
    "validate_task",
]
