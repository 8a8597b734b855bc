"""Question decomposition and the non-LLM metric family.

The probe metric splits a prompt into one yes/no question per object and
multiplies the yes-probabilities, so a single misbound attribute drags the
whole score down. Embedding similarity metrics clamp the raw cosine at zero.
The detection metric defers to the geometry module.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..backends.base import BackendSet, ImageRef
from ..geometry import score_relation
from ..suite.template import noun_phrase
from ..suite.types import PromptRecord
from .types import MetricConfig, MetricInapplicable, MetricScore, Question


def disentangle(record: PromptRecord, fold_multi_attribute: bool = True) -> list[Question]:
    """One question per object ("a green bench?"), in object order.

    With folding off, objects with several attributes yield one question per
    attribute instead.
    """
    if record.structure_missing or not record.objects:
        raise MetricInapplicable(f"{record.id}: no structured objects")
    if not any(o.attributes for o in record.objects):
        raise MetricInapplicable(f"{record.id}: no attributed objects")
    questions = []
    for index, obj in enumerate(record.objects):
        if fold_multi_attribute or len(obj.attributes) <= 1:
            questions.append(Question(f"{noun_phrase(obj)}?", index))
        else:
            from ..suite.types import ObjectSpec

            for attr in obj.attributes:
                single = ObjectSpec(obj.noun, (attr,))
                questions.append(Question(f"{noun_phrase(single)}?", index))
    return questions


def bvqa_score(
    image: ImageRef, record: PromptRecord, backends: BackendSet, cfg: MetricConfig
) -> MetricScore:
    """Product of per-question yes-probabilities."""
    questions = disentangle(record, cfg.fold_multi_attribute)
    probabilities = [
        float(backends.vqa.vqa_yes_probability(image, q.text)) for q in questions
    ]
    value = 1.0
    for p in probabilities:
        value *= p
    return MetricScore(
        prompt_id=record.id,
        image_id=image.id,
        metric="b_vqa",
        value=value,
        detail={"questions": [q.text for q in questions], "probabilities": probabilities},
    )


def _clamped_cosine(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    raw = float(np.dot(a, b))
    return max(0.0, min(1.0, raw)), raw


def clip_score(
    image: ImageRef, text: str, backends: BackendSet, prompt_id: str = ""
) -> MetricScore:
    """Clamped cosine between text and image embeddings."""
    value, raw = _clamped_cosine(
        backends.embedder.embed_text(text), backends.embedder.embed_image(image)
    )
    return MetricScore(
        prompt_id=prompt_id,
        image_id=image.id,
        metric="clip",
        value=value,
        detail={"cosine": raw},
    )


def blip_clip_score(
    image: ImageRef, text: str, backends: BackendSet, prompt_id: str = ""
) -> MetricScore:
    """Caption the image, then clamped text-text cosine against the prompt."""
    caption = backends.captioner.caption(image)
    value, raw = _clamped_cosine(
        backends.embedder.embed_text(caption), backends.embedder.embed_text(text)
    )
    return MetricScore(
        prompt_id=prompt_id,
        image_id=image.id,
        metric="b_clip",
        value=value,
        detail={"caption": caption, "cosine": raw},
    )


def unidet_metric(
    image: ImageRef, record: PromptRecord, backends: BackendSet, cfg: MetricConfig
) -> MetricScore:
    """Detection-geometry score over the record's spatial relations.

    Spatial-category records have exactly one relation, making this the
    binary predicate; complex records average over their spatial relations.
    """
    if record.structure_missing or not record.spatial_relations():
        raise MetricInapplicable(f"{record.id}: no spatial relation")
    detections = backends.detector.detect(image)
    geo_cfg = cfg.geometry_config(image.width, image.height)
    scores = []
    details: list[dict[str, Any]] = []
    for index, rel in enumerate(record.relations):
        if rel.kind != "spatial":
            continue
        score, detail = score_relation(detections, record, index, cfg.noun_classes, geo_cfg)
        scores.append(score)
        details.append(detail)
    value = sum(scores) / len(scores)
    return MetricScore(
        prompt_id=record.id,
        image_id=image.id,
        metric="unidet",
        value=value,
        detail={
            "relations": details,
            "detections": [
                {
                    "label": d.label,
                    "confidence": d.confidence,
                    "bbox": [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                }
                for d in detections
            ],
        },
    )


def three_in_one(
    image: ImageRef, record: PromptRecord, backends: BackendSet, cfg: MetricConfig
) -> MetricScore:
    """Mean of the applicable sub-metrics for a complex prompt.

    The probe sub-metric needs attributed objects and the detection
    sub-metric needs a spatial relation; either is skipped (and recorded
    as inapplicable) when the record lacks that structure. The embedding
    sub-metric always applies.
    """
    if record.category != "complex":
        raise MetricInapplicable(f"three_in_one applies to complex records, got {record.category!r}")
    components: dict[str, Any] = {}
    applicable: list[str] = []

    try:
        components["b_vqa"] = bvqa_score(image, record, backends, cfg).value
        applicable.append("b_vqa")
    except MetricInapplicable:
        components["b_vqa"] = None

    try:
        components["unidet"] = unidet_metric(image, record, backends, cfg).value
        applicable.append("unidet")
    except MetricInapplicable:
        components["unidet"] = None

    components["clip"] = clip_score(image, record.text, backends, record.id).value
    applicable.append("clip")

    value = sum(components[name] for name in applicable) / len(applicable)
    return MetricScore(
        prompt_id=record.id,
        image_id=image.id,
        metric="three_in_one",
        value=value,
        detail={"components": components, "applicable": applicable},
    )
