"""Multimodal-LLM scoring, with and without the two-turn describe/predict flow.

The two-turn variant first asks the model to describe the image with a
category-specific focus, then asks for a 0-100 alignment score returned as
JSON. Responses are parsed tolerantly: strict JSON first, then the first
integer in [0, 100]; anything else scores 0 and is flagged.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from ..backends.base import BackendSet, ImageRef
from ..suite.template import noun_phrase
from ..suite.types import ATTRIBUTE_CATEGORIES, PromptRecord
from .types import MetricError, MetricScore

JSON_KEYS_INSTRUCTION = (
    "Provide your analysis and explanation in JSON format with the following "
    "keys: score (e.g., 85), explanation (within 20 words)."
)

_ATTRIBUTE_DESCRIBE = (
    "You are my assistant to identify any objects and their {kind} in the image. "
    "Briefly describe what it is in the image within 50 words."
)
_ATTRIBUTE_PREDICT = (
    "According to the image and your previous answer, evaluate if there is "
    '"{text}" in the image. Give a score from 0 to 100, according the criteria: '
    "100: every mentioned object is present and has its described attribute. "
    "75: every mentioned object is present and is mostly as described. "
    "20: the objects are present but the attributes are wrong. "
    "10: the mentioned objects are missing from the image. " + JSON_KEYS_INSTRUCTION
)
_SPATIAL_DESCRIBE = (
    "You are my assistant to identify objects and their spatial layout in the "
    "image. Briefly describe the image within 50 words."
)
_SPATIAL_PREDICT = (
    "According to the image and your previous answer, evaluate if the text "
    '"{text}" is correctly portrayed in the image. Give a score from 0 to 100, '
    "according the criteria: "
    "100: correct spatial layout in the image for all objects mentioned in the text. "
    "80: basically, the spatial layout of objects matches the text. "
    "60: the spatial layout is not aligned properly with the text. "
    "40: the image is not aligned properly with the text. "
    "20: the image is almost irrelevant to the text. " + JSON_KEYS_INSTRUCTION
)
_NON_SPATIAL_DESCRIBE = (
    "You are my assistant to identify the actions, events, objects and their "
    "relationships in the image. Briefly describe the image within 50 words."
)
_NON_SPATIAL_PREDICT = (
    "According to the image and your previous answer, evaluate if the text "
    '"{text}" is correctly portrayed in the image. Give a score from 0 to 100, '
    "according the criteria: "
    "100: the image accurately portrays the actions, events and relationships "
    "between objects described in the text. "
    "80: the image portrays most of the actions, events and relationships but "
    "with minor discrepancies. "
    "60: the image depicts some elements, but the action relationships between "
    "objects are not correct. "
    "40: the image fails to convey the full scope of the text. "
    "20: the image does not depict any actions or events that match the text. "
    + JSON_KEYS_INSTRUCTION
)
_COMPLEX_DESCRIBE = (
    "You are my assistant to evaluate the correspondence of the image to a "
    "given text prompt. Briefly describe the image within 50 words, focusing "
    "on the objects in the image and their attributes (such as color, shape, "
    "texture), spatial layout and action relationships."
)
_COMPLEX_PREDICT = (
    "According to the image and your previous answer, evaluate how well the "
    'image aligns with the text prompt: "{text}". Give a score from 0 to 100, '
    "according the criteria: "
    "100: the image perfectly matches the content of the text prompt, with no "
    "discrepancies. "
    "80: the image portrays most of the content but with minor discrepancies. "
    "60: the image depicts some elements, but ignores some key parts or details. "
    "40: the image does not depict any actions or events that match the text. "
    "20: the image fails to convey the full scope of the text prompt. "
    + JSON_KEYS_INSTRUCTION
)


@dataclass
class CotPromptSet:
    """Per-category describe/predict prompt templates for two-turn scoring."""

    describe_templates: dict[str, str] = field(default_factory=dict)
    predict_templates: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for category, template in self.predict_templates.items():
            if "0 to 100" not in template or "JSON" not in template:
                raise MetricError(
                    f"predict template for {category!r} must ask for a 0-100 score as JSON"
                )

    def describe(self, category: str) -> str:
        if category not in self.describe_templates:
            raise MetricError(f"no describe prompt for category {category!r}")
        return self.describe_templates[category]

    def predict(self, category: str, text: str) -> str:
        if category not in self.predict_templates:
            raise MetricError(f"no predict prompt for category {category!r}")
        return self.predict_templates[category].replace("{text}", text)


def default_cot_prompts() -> CotPromptSet:
    describe = {}
    predict = {}
    for kind in ATTRIBUTE_CATEGORIES:
        describe[kind] = _ATTRIBUTE_DESCRIBE.format(kind=kind)
        predict[kind] = _ATTRIBUTE_PREDICT
    describe["spatial"] = _SPATIAL_DESCRIBE
    predict["spatial"] = _SPATIAL_PREDICT
    describe["non_spatial"] = _NON_SPATIAL_DESCRIBE
    predict["non_spatial"] = _NON_SPATIAL_PREDICT
    describe["complex"] = _COMPLEX_DESCRIBE
    predict["complex"] = _COMPLEX_PREDICT
    return CotPromptSet(describe_templates=describe, predict_templates=predict)


_FENCE_RE = re.compile(r"```(?:json)?(.*?)```", re.DOTALL | re.IGNORECASE)
_OBJECT_RE = re.compile(r"\{[^{}]*\}", re.DOTALL)
_INT_RE = re.compile(r"-?\d+")


def parse_score_response(text: str) -> tuple[float, bool]:
    """Extract a 0-100 score from an LLM response; (value/100, parse_failed).

    Tries strict JSON (whole text, fenced blocks, first {...} span) for a
    numeric "score" key, then falls back to the first bare integer within
    [0, 100]. Unparseable responses yield (0.0, True).
    """
    candidates = []
    stripped = text.strip()
    if stripped:
        candidates.append(stripped)
    candidates.extend(m.strip() for m in _FENCE_RE.findall(text))
    candidates.extend(m.group(0) for m in _OBJECT_RE.finditer(text))
    for candidate in candidates:
        try:
            payload = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(payload, dict) and isinstance(payload.get("score"), (int, float)):
            score = min(100.0, max(0.0, float(payload["score"])))
            return score / 100.0, False
    for match in _INT_RE.finditer(text):
        n = int(match.group(0))
        if 0 <= n <= 100:
            return n / 100.0, False
    return 0.0, True


def mgpt_cot_score(
    image: ImageRef,
    record: PromptRecord,
    backends: BackendSet,
    prompts: Optional[CotPromptSet] = None,
) -> MetricScore:
    """Two-turn describe-then-score flow; value is the parsed score / 100."""
    prompts = prompts or default_cot_prompts()
    describe_prompt = prompts.describe(record.category)
    predict_prompt = prompts.predict(record.category, record.text)
    describe_response = backends.chat.chat(image, [describe_prompt])
    predict_response = backends.chat.chat(
        image, [describe_prompt, describe_response, predict_prompt]
    )
    value, failed = parse_score_response(predict_response)
    return MetricScore(
        prompt_id=record.id,
        image_id=image.id,
        metric="mgpt_cot",
        value=value,
        detail={
            "describe_response": describe_response,
            "predict_response": predict_response,
            "parse_failed": failed,
        },
    )


def _object_question(obj) -> str:
    phrase = noun_phrase(obj)
    question = f"Is there {phrase} in the image? Give a score from 0 to 100."
    if obj.attributes:
        attrs = ", ".join(a.value for a in obj.attributes)
        question += (
            f" If {phrase} is not present or if the {obj.noun} is not {attrs}, give a lower score."
        )
    else:
        question += f" If {phrase} is not present, give a lower score."
    return question


def mgpt_score(image: ImageRef, record: PromptRecord, backends: BackendSet) -> MetricScore:
    """Single-turn scoring: per-object questions for attribute prompts
    (averaged), one overall-alignment question otherwise."""
    if record.category in ATTRIBUTE_CATEGORIES and record.objects and not record.structure_missing:
        questions = [_object_question(obj) for obj in record.objects]
    else:
        questions = [
            f'Rate the overall alignment between the image and the text prompt "{record.text}". '
            "Give a score from 0 to 100."
        ]
    responses = [backends.chat.chat(image, [q]) for q in questions]
    parsed = [parse_score_response(r) for r in responses]
    scores = [value for value, _ in parsed]
    failures = [failed for _, failed in parsed]
    return MetricScore(
        prompt_id=record.id,
        image_id=image.id,
        metric="mgpt",
        value=sum(scores) / len(scores),
        detail={
            "questions": questions,
            "responses": responses,
            "scores": scores,
            "parse_failures": failures,
        },
    )
