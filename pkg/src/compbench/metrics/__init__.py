"""Metric engine: probe/embedding/detection/LLM scorers over a prompt suite."""

from .types import (
    METRIC_NAMES,
    MetricConfig,
    MetricError,
    MetricInapplicable,
    MetricScore,
    Question,
)
from .scoring import (
    blip_clip_score,
    bvqa_score,
    clip_score,
    disentangle,
    three_in_one,
    unidet_metric,
)
from .llm import (
    CotPromptSet,
    default_cot_prompts,
    mgpt_cot_score,
    mgpt_score,
    parse_score_response,
)
from .engine import (
    EvaluationResult,
    ImageIndex,
    ScoreStore,
    build_image_index,
    evaluate_suite,
)

__all__ = [
    "METRIC_NAMES",
    "CotPromptSet",
    "EvaluationResult",
    "ImageIndex",
    "MetricConfig",
    "MetricError",
    "MetricInapplicable",
    "MetricScore",
    "Question",
    "ScoreStore",
    "blip_clip_score",
    "build_image_index",
    "bvqa_score",
    "clip_score",
    "default_cot_prompts",
    "disentangle",
    "evaluate_suite",
    "mgpt_cot_score",
    "mgpt_score",
    "parse_score_response",
    "three_in_one",
    "unidet_metric",
]
