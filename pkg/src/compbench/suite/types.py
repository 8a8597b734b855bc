"""Record types for the benchmark prompt suite.

Every prompt carries structured semantics (objects, attributes, relations)
so downstream metrics never have to parse raw prompt text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

ATTRIBUTE_CATEGORIES = ("color", "shape", "texture")
CATEGORIES = ("color", "shape", "texture", "spatial", "non_spatial", "complex")
SPLITS = ("train", "test")
NOVELTIES = ("seen", "unseen", "not_applicable")
SOURCES = ("template", "chatgpt", "cc500", "coco")

PROXIMITY_WORDS = ("on the side of", "next to", "near")
DIRECTIONAL_WORDS = (
    "on the left of",
    "on the right of",
    "on the bottom of",
    "on the top of",
)
SPATIAL_WORDS = PROXIMITY_WORDS + DIRECTIONAL_WORDS


class SuiteError(ValueError):
    """Invalid suite data or configuration."""


@dataclass(frozen=True)
class AttributeSpec:
    kind: str  # color | shape | texture
    value: str

    def __post_init__(self):
        if self.kind not in ATTRIBUTE_CATEGORIES:
            raise SuiteError(f"unknown attribute kind: {self.kind!r}")
        if not self.value:
            raise SuiteError("attribute value must be non-empty")


@dataclass(frozen=True)
class ObjectSpec:
    noun: str
    attributes: tuple[AttributeSpec, ...] = ()

    def __post_init__(self):
        if not self.noun:
            raise SuiteError("object noun must be non-empty")
        object.__setattr__(self, "attributes", tuple(self.attributes))

    @property
    def pairs(self) -> list[tuple[str, str]]:
        """(attribute value, noun) pairs, one per attribute."""
        return [(a.value, self.noun) for a in self.attributes]


@dataclass(frozen=True)
class RelationSpec:
    subject_index: int
    object_index: int
    word: str
    kind: str  # spatial | non_spatial

    def __post_init__(self):
        if self.subject_index == self.object_index:
            raise SuiteError("relation must link two distinct objects")
        if self.kind not in ("spatial", "non_spatial"):
            raise SuiteError(f"unknown relation kind: {self.kind!r}")
        if self.kind == "spatial" and self.word not in SPATIAL_WORDS:
            raise SuiteError(f"unknown spatial phrase: {self.word!r}")

    @property
    def directional(self) -> bool:
        return self.word in DIRECTIONAL_WORDS


@dataclass
class PromptRecord:
    id: str
    category: str
    split: str
    text: str
    objects: tuple[ObjectSpec, ...] = ()
    relations: tuple[RelationSpec, ...] = ()
    novelty: str = "not_applicable"
    source: str = "template"
    structure_missing: bool = False

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise SuiteError(f"unknown category: {self.category!r}")
        if self.split not in SPLITS:
            raise SuiteError(f"unknown split: {self.split!r}")
        if self.novelty not in NOVELTIES:
            raise SuiteError(f"unknown novelty: {self.novelty!r}")
        if self.source not in SOURCES:
            raise SuiteError(f"unknown source: {self.source!r}")
        if not self.text:
            raise SuiteError("prompt text must be non-empty")
        self.objects = tuple(self.objects)
        self.relations = tuple(self.relations)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        """All (attribute value, noun) pairs across objects."""
        out: list[tuple[str, str]] = []
        for obj in self.objects:
            out.extend(obj.pairs)
        return out

    def spatial_relations(self) -> list[RelationSpec]:
        return [r for r in self.relations if r.kind == "spatial"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "category": self.category,
            "split": self.split,
            "novelty": self.novelty,
            "text": self.text,
            "source": self.source,
            "structure_missing": self.structure_missing,
            "objects": [
                {
                    "noun": o.noun,
                    "attributes": [{"kind": a.kind, "value": a.value} for a in o.attributes],
                }
                for o in self.objects
            ],
            "relations": [
                {
                    "subject_index": r.subject_index,
                    "object_index": r.object_index,
                    "word": r.word,
                    "kind": r.kind,
                }
                for r in self.relations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PromptRecord":
        objects = tuple(
            ObjectSpec(
                noun=o["noun"],
                attributes=tuple(
                    AttributeSpec(kind=a["kind"], value=a["value"])
                    for a in o.get("attributes", [])
                ),
            )
            for o in data.get("objects", [])
        )
        relations = tuple(
            RelationSpec(
                subject_index=r["subject_index"],
                object_index=r["object_index"],
                word=r["word"],
                kind=r["kind"],
            )
            for r in data.get("relations", [])
        )
        return cls(
            id=data["id"],
            category=data["category"],
            split=data["split"],
            novelty=data.get("novelty", "not_applicable"),
            text=data["text"],
            source=data.get("source", "template"),
            structure_missing=data.get("structure_missing", False),
            objects=objects,
            relations=relations,
        )


@dataclass
class Vocabulary:
    """Word lists the rule-based generators draw from."""

    colors: tuple[str, ...] = ()
    shapes: tuple[str, ...] = ()
    textures: dict[str, tuple[str, ...]] = field(default_factory=dict)
    spatial_words: tuple[str, ...] = SPATIAL_WORDS
    non_spatial_words: tuple[str, ...] = ()
    nouns: tuple[str, ...] = ()  # general object nouns for color/shape templates
    persons: tuple[str, ...] = ()
    animals: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()

    def attribute_values(self, category: str) -> tuple[str, ...]:
        if category == "color":
            return self.colors
        if category == "shape":
            return self.shapes
        if category == "texture":
            return tuple(self.textures)
        raise SuiteError(f"not an attribute category: {category!r}")

    def spatial_noun_pool(self) -> tuple[str, ...]:
        return self.persons + self.animals + self.objects

    def validate(self) -> None:
        if len(self.textures) != 8:
            raise SuiteError(f"texture map must have exactly 8 textures, got {len(self.textures)}")
        for texture, nouns in self.textures.items():
            if len(nouns) < 8:
                raise SuiteError(f"texture {texture!r} maps to {len(nouns)} nouns, need >= 8")
        if tuple(self.spatial_words) != SPATIAL_WORDS:
            raise SuiteError("spatial word list must be the 7 canonical phrases")


@dataclass
class SuiteManifest:
    """The full prompt suite plus derived count summaries."""

    records: list[PromptRecord]

    def by_category(self, category: str) -> list[PromptRecord]:
        return [r for r in self.records if r.category == category]

    def category_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CATEGORIES}
        for r in self.records:
            counts[r.category] += 1
        return counts

    def split_counts(self) -> dict[str, dict[str, int]]:
        counts = {c: {"train": 0, "test": 0} for c in CATEGORIES}
        for r in self.records:
            counts[r.category][r.split] += 1
        return counts

    def novelty_counts(self) -> dict[str, dict[str, int]]:
        counts = {c: {"seen": 0, "unseen": 0} for c in ATTRIBUTE_CATEGORIES}
        for r in self.records:
            if r.category in counts and r.novelty in ("seen", "unseen"):
                counts[r.category][r.novelty] += 1
        return counts

    def get(self, prompt_id: str) -> Optional[PromptRecord]:
        for r in self.records:
            if r.id == prompt_id:
                return r
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "records": [r.to_dict() for r in self.records],
            "category_counts": self.category_counts(),
            "split_counts": self.split_counts(),
            "novelty_counts": self.novelty_counts(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SuiteManifest":
        return cls(records=[PromptRecord.from_dict(r) for r in data["records"]])
