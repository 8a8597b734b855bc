"""Suite validation and the seen/unseen test-set partition."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any

from .types import (
    ATTRIBUTE_CATEGORIES,
    CATEGORIES,
    DIRECTIONAL_WORDS,
    PromptRecord,
    SuiteError,
    SuiteManifest,
)
from .template import render_template_text

EXPECTED_PER_CATEGORY = 1000
EXPECTED_TRAIN = 700
EXPECTED_TEST = 300
EXPECTED_SEEN = 200
EXPECTED_UNSEEN = 100


def assign_seen_unseen(
    test_records: list[PromptRecord], train_records: list[PromptRecord]
) -> list[PromptRecord]:
    """Mark each test record seen/unseen against the train records.

    A test record is unseen iff none of its (attribute value, noun) pairs
    occurs in any train record. Both lists must belong to the same attribute
    category.
    """
    categories = {r.category for r in test_records} | {r.category for r in train_records}
    if not categories:
        return []
    if len(categories) > 1:
        raise SuiteError(f"records span multiple categories: {sorted(categories)}")
    category = categories.pop()
    if category not in ATTRIBUTE_CATEGORIES:
        raise SuiteError(f"seen/unseen applies to attribute categories, not {category!r}")

    train_pairs = {pair for r in train_records for pair in r.pairs}
    out = []
    for record in test_records:
        unseen = all(pair not in train_pairs for pair in record.pairs)
        out.append(replace(record, novelty="unseen" if unseen else "seen"))
    return out


@dataclass
class ValidationReport:
    ok: bool
    category_counts: dict[str, int]
    split_counts: dict[str, dict[str, int]]
    novelty_counts: dict[str, dict[str, int]]
    duplicate_texts: list[str] = field(default_factory=list)
    contrastive_orphans: list[str] = field(default_factory=list)
    structure_missing: int = 0
    problems: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "category_counts": self.category_counts,
            "split_counts": self.split_counts,
            "novelty_counts": self.novelty_counts,
            "duplicate_texts": self.duplicate_texts,
            "contrastive_orphans": self.contrastive_orphans,
            "structure_missing": self.structure_missing,
            "problems": self.problems,
        }


def _check_record_invariants(record: PromptRecord, problems: list[str]) -> None:
    if record.structure_missing:
        return
    if record.category in ATTRIBUTE_CATEGORIES:
        attributed = [o for o in record.objects if o.attributes]
        if len(attributed) < 2:
            problems.append(f"{record.id}: attribute prompt needs >=2 attributed objects")
    if record.category == "spatial":
        if len(record.spatial_relations()) != 1:
            problems.append(f"{record.id}: spatial prompt needs exactly one spatial relation")
    if record.novelty != "not_applicable":
        if not (record.category in ATTRIBUTE_CATEGORIES and record.split == "test"):
            problems.append(f"{record.id}: novelty set outside attribute test prompts")
    if record.source == "template" and record.objects:
        if render_template_text(record) != record.text:
            problems.append(f"{record.id}: template text not reconstructible from structure")


def _contrastive_orphans(records: list[PromptRecord]) -> list[str]:
    keyed: dict[tuple[str, str, str], list[str]] = {}
    for r in records:
        if r.category != "spatial" or r.structure_missing:
            continue
        rels = r.spatial_relations()
        if len(rels) != 1 or rels[0].word not in DIRECTIONAL_WORDS:
            continue
        rel = rels[0]
        key = (rel.word, r.objects[rel.subject_index].noun, r.objects[rel.object_index].noun)
        keyed.setdefault(key, []).append(r.id)
    orphans = []
    for (word, a, b), ids in keyed.items():
        if (word, b, a) not in keyed:
            orphans.extend(ids)
    return sorted(orphans)


def validate_suite(manifest: SuiteManifest) -> ValidationReport:
    """Report counts and invariant violations; never raises."""
    problems: list[str] = []
    category_counts = manifest.category_counts()
    split_counts = manifest.split_counts()
    novelty_counts = manifest.novelty_counts()

    text_counts = Counter((r.category, r.text) for r in manifest.records)
    duplicates = sorted(text for (_, text), n in text_counts.items() if n > 1)
    if duplicates:
        problems.append(f"{len(duplicates)} duplicated prompt texts within a category")

    id_counts = Counter(r.id for r in manifest.records)
    dup_ids = [i for i, n in id_counts.items() if n > 1]
    if dup_ids:
        problems.append(f"duplicate record ids: {sorted(dup_ids)[:5]}")

    for record in manifest.records:
        _check_record_invariants(record, problems)

    orphans = _contrastive_orphans(manifest.records)
    if orphans:
        problems.append(f"{len(orphans)} directional spatial prompts missing their swapped twin")

    for category in CATEGORIES:
        if category_counts[category] != EXPECTED_PER_CATEGORY:
            problems.append(
                f"{category}: {category_counts[category]} prompts, expected {EXPECTED_PER_CATEGORY}"
            )
        if split_counts[category]["train"] != EXPECTED_TRAIN:
            problems.append(
                f"{category}: {split_counts[category]['train']} train prompts, expected {EXPECTED_TRAIN}"
            )
        if split_counts[category]["test"] != EXPECTED_TEST:
            problems.append(
                f"{category}: {split_counts[category]['test']} test prompts, expected {EXPECTED_TEST}"
            )
    for category in ATTRIBUTE_CATEGORIES:
        if novelty_counts[category]["seen"] != EXPECTED_SEEN:
            problems.append(
                f"{category}: {novelty_counts[category]['seen']} seen test prompts, expected {EXPECTED_SEEN}"
            )
        if novelty_counts[category]["unseen"] != EXPECTED_UNSEEN:
            problems.append(
                f"{category}: {novelty_counts[category]['unseen']} unseen test prompts, expected {EXPECTED_UNSEEN}"
            )

    structure_missing = sum(1 for r in manifest.records if r.structure_missing)
    return ValidationReport(
        ok=not problems,
        category_counts=category_counts,
        split_counts=split_counts,
        novelty_counts=novelty_counts,
        duplicate_texts=duplicates,
        contrastive_orphans=orphans,
        structure_missing=structure_missing,
        problems=problems,
    )
