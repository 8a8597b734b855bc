"""Bounding-box geometry for the detection-based spatial metric.

Image coordinates, y increasing downward. A subject is "left of" an object
when its center is strictly left, the horizontal gap dominates the vertical
one, and the boxes barely overlap (IoU under the configured threshold).
Proximity phrases (next to / near / on the side of) compare center distance
against a fraction of the image diagonal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .suite.types import PromptRecord, SuiteError

DIRECTIONAL_BY_WORD = {
    "on the left of": "left",
    "on the right of": "right",
    "on the top of": "top",
    "on the bottom of": "bottom",
}
PROXIMITY_PHRASES = ("on the side of", "next to", "near")


class GeometryError(ValueError):
    """Invalid box or configuration."""


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if not math.isfinite(v) or v < 0:
                raise GeometryError(f"box coordinates must be finite and >= 0: {self}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise GeometryError(f"degenerate box: {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class Detection:
    label: str
    confidence: float
    bbox: BBox

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise GeometryError(f"confidence out of range: {self.confidence}")


@dataclass(frozen=True)
class GeometryConfig:
    iou_threshold: float = 0.1
    proximity_threshold: float = 0.15  # fraction of the image diagonal
    image_width: int = 512
    image_height: int = 512
    min_confidence: float = 0.5  # detections below this are ignored

    def __post_init__(self):
        if not 0.0 < self.iou_threshold < 1.0:
            raise GeometryError("iou_threshold must be in (0, 1)")
        if not 0.0 < self.proximity_threshold < 1.0:
            raise GeometryError("proximity_threshold must be in (0, 1)")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.image_width, self.image_height)


@dataclass
class NounClassMap:
    """Maps prompt nouns to detector class labels.

    Unmapped nouns fall back to the noun itself unless `strict` is set, in
    which case they are unresolvable (and score 0 with a diagnostic).
    """

    mapping: dict[str, str] = field(default_factory=dict)
    strict: bool = False

    def resolve(self, noun: str) -> Optional[str]:
        if noun in self.mapping:
            return self.mapping[noun]
        return None if self.strict else noun


def iou(a: BBox, b: BBox) -> float:
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def center(b: BBox) -> tuple[float, float]:
    return ((b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0)


def classify_directional(a: BBox, b: BBox, cfg: GeometryConfig) -> Optional[str]:
    """Relation of `a` relative to `b`: left/right/top/bottom, or None.

    None when the IoU gate fails, the axis offsets tie, or centers coincide.
    """
    if iou(a, b) >= cfg.iou_threshold:
        return None
    (x1, y1), (x2, y2) = center(a), center(b)
    dx, dy = abs(x1 - x2), abs(y1 - y2)
    if dx > dy:
        return "left" if x1 < x2 else "right"
    if dy > dx:
        return "top" if y1 < y2 else "bottom"
    return None


def classify_proximity(a: BBox, b: BBox, cfg: GeometryConfig) -> bool:
    (x1, y1), (x2, y2) = center(a), center(b)
    return math.hypot(x1 - x2, y1 - y2) < cfg.proximity_threshold * cfg.diagonal


def _best_detection(
    detections: list[Detection], label: Optional[str], cfg: GeometryConfig
) -> Optional[Detection]:
    if label is None:
        return None
    candidates = [
        d for d in detections if d.label == label and d.confidence >= cfg.min_confidence
    ]
    return max(candidates, key=lambda d: d.confidence) if candidates else None


def relation_satisfied(
    subject: BBox, obj: BBox, word: str, cfg: GeometryConfig
) -> bool:
    """Whether the subject box stands in the named relation to the object box."""
    if word in DIRECTIONAL_BY_WORD:
        return classify_directional(subject, obj, cfg) == DIRECTIONAL_BY_WORD[word]
    if word in PROXIMITY_PHRASES:
        return classify_proximity(subject, obj, cfg)
    raise GeometryError(f"unknown spatial phrase: {word!r}")


def score_relation(
    detections: list[Detection],
    record: PromptRecord,
    relation_index: int,
    mapping: NounClassMap,
    cfg: GeometryConfig,
) -> tuple[float, dict[str, Any]]:
    """Score one spatial relation of a record; (score, diagnostic detail)."""
    rel = record.relations[relation_index]
    subject_noun = record.objects[rel.subject_index].noun
    object_noun = record.objects[rel.object_index].noun
    detail: dict[str, Any] = {
        "word": rel.word,
        "subject": subject_noun,
        "object": object_noun,
    }

    subject_label = mapping.resolve(subject_noun)
    object_label = mapping.resolve(object_noun)
    if subject_label is None or object_label is None:
        detail["stage"] = "unmapped_noun"
        detail["unmapped"] = [
            n for n, l in ((subject_noun, subject_label), (object_noun, object_label)) if l is None
        ]
        return 0.0, detail

    subject_det = _best_detection(detections, subject_label, cfg)
    object_det = _best_detection(detections, object_label, cfg)
    if subject_det is None or object_det is None:
        detail["stage"] = "missing_detection"
        detail["missing"] = [
            n for n, d in ((subject_noun, subject_det), (object_noun, object_det)) if d is None
        ]
        return 0.0, detail

    a, b = subject_det.bbox, object_det.bbox
    detail["subject_bbox"] = [a.x_min, a.y_min, a.x_max, a.y_max]
    detail["object_bbox"] = [b.x_min, b.y_min, b.x_max, b.y_max]
    detail["iou"] = iou(a, b)
    if rel.word in DIRECTIONAL_BY_WORD:
        detail["classified"] = classify_directional(a, b, cfg)
        ok = detail["classified"] == DIRECTIONAL_BY_WORD[rel.word]
    else:
        (x1, y1), (x2, y2) = center(a), center(b)
        detail["center_distance"] = math.hypot(x1 - x2, y1 - y2)
        ok = classify_proximity(a, b, cfg)
    detail["stage"] = "ok" if ok else "relation_mismatch"
    return (1.0 if ok else 0.0), detail


def spatial_score(
    detections: list[Detection],
    record: PromptRecord,
    mapping: NounClassMap,
    cfg: GeometryConfig,
) -> tuple[float, dict[str, Any]]:
    """Binary score for a spatial-category record (exactly one spatial relation)."""
    if record.category != "spatial":
        raise SuiteError(f"spatial_score needs a spatial record, got {record.category!r}")
    rels = record.spatial_relations()
    if len(rels) != 1:
        raise SuiteError(f"{record.id}: expected exactly one spatial relation, got {len(rels)}")
    index = record.relations.index(rels[0])
    return score_relation(detections, record, index, mapping, cfg)


def detections_to_jsonl_entry(
    image_id: str, detections: list[Detection], width: int, height: int
) -> dict[str, Any]:
    return {
        "image_id": image_id,
        "image_width": width,
        "image_height": height,
        "detections": [
            {
                "label": d.label,
                "confidence": d.confidence,
                "bbox": [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
            }
            for d in detections
        ],
    }


def load_detections_jsonl(path: Union[str, Path]) -> dict[str, dict[str, Any]]:
    """Load the detection replay format: one JSON object per image line.

    Returns image_id -> {detections, image_width, image_height}.
    """
    out: dict[str, dict[str, Any]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        entry = json.loads(line)
        detections = [
            Detection(d["label"], d["confidence"], BBox(*d["bbox"]))
            for d in entry["detections"]
        ]
        out[entry["image_id"]] = {
            "detections": detections,
            "image_width": entry.get("image_width", 512),
            "image_height": entry.get("image_height", 512),
        }
    return out
