"""Metric engine types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..geometry import NounClassMap

METRIC_NAMES = ("b_vqa", "clip", "b_clip", "unidet", "three_in_one", "mgpt", "mgpt_cot")


class MetricError(ValueError):
    """Bad metric configuration or input."""


class MetricInapplicable(MetricError):
    """The record lacks the structure this metric needs."""


@dataclass(frozen=True)
class Question:
    """One yes/no probe covering a single (attribute set, noun) pair."""

    text: str
    object_index: int


@dataclass
class MetricScore:
    prompt_id: str
    image_id: str
    metric: str
    value: float
    detail: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise MetricError(f"unknown metric: {self.metric!r}")
        if not 0.0 <= self.value <= 1.0:
            raise MetricError(f"metric value out of [0,1]: {self.value}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "image_id": self.image_id,
            "metric": self.metric,
            "value": self.value,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricScore":
        return cls(
            prompt_id=data["prompt_id"],
            image_id=data["image_id"],
            metric=data["metric"],
            value=data["value"],
            detail=data.get("detail", {}),
        )


@dataclass
class MetricConfig:
    """Knobs shared by the scoring functions and the engine."""

    iou_threshold: float = 0.1
    proximity_threshold: float = 0.15
    min_confidence: float = 0.5
    fold_multi_attribute: bool = True  # one question per object vs per attribute
    noun_classes: NounClassMap = field(default_factory=NounClassMap)

    def geometry_config(self, width: int, height: int):
        from ..geometry import GeometryConfig

        return GeometryConfig(
            iou_threshold=self.iou_threshold,
            proximity_threshold=self.proximity_threshold,
            image_width=width,
            image_height=height,
            min_confidence=self.min_confidence,
        )
