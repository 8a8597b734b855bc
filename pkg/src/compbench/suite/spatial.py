"""Spatial-relationship prompt generation with contrastive noun swaps.

Directional prompts (left/right/bottom/top) always come in pairs related by
swapping the two nouns, so a metric that cannot tell left from right cannot
score both members of a pair correctly.
"""

from __future__ import annotations

import random
from typing import Optional

from .types import (
    DIRECTIONAL_WORDS,
    ObjectSpec,
    PromptRecord,
    RelationSpec,
    SuiteError,
    Vocabulary,
)
from .template import render_spatial_text


def _spatial_record(record_id, split, noun_a, word, noun_b) -> PromptRecord:
    return PromptRecord(
        id=record_id,
        category="spatial",
        split=split,
        text=render_spatial_text(noun_a, word, noun_b),
        objects=(ObjectSpec(noun=noun_a), ObjectSpec(noun=noun_b)),
        relations=(RelationSpec(0, 1, word, "spatial"),),
        source="template",
    )


def swap_record(record: PromptRecord, new_id: str) -> PromptRecord:
    """The contrastive twin: same relation word, nouns swapped."""
    rel = record.relations[0]
    noun_a = record.objects[rel.subject_index].noun
    noun_b = record.objects[rel.object_index].noun
    return _spatial_record(new_id, record.split, noun_b, rel.word, noun_a)


def generate_spatial_prompts(
    vocab: Vocabulary,
    seed: int,
    count: int,
    split: str = "train",
    used_texts: Optional[set[str]] = None,
    id_prefix: Optional[str] = None,
) -> list[PromptRecord]:
    """Generate `count` distinct spatial prompts, closed under noun swap.

    Nouns come from the person/animal/object pools. Directional relations
    consume two slots (prompt + swapped twin); proximity relations one.
    """
    if count < 1:
        raise SuiteError("count must be >= 1")
    directional = [w for w in vocab.spatial_words if w in DIRECTIONAL_WORDS]
    if directional and count % 2 != 0:
        raise SuiteError("count must be even when directional relations are included")
    pool = vocab.spatial_noun_pool()
    if len(pool) < 2:
        raise SuiteError("spatial noun pool must have at least 2 nouns")

    rng = random.Random(seed)
    seen_texts = used_texts if used_texts is not None else set()
    prefix = id_prefix or f"spatial_{split}"
    records: list[PromptRecord] = []
    attempts = 0
    max_attempts = max(10_000, count * 200)
    index = 0
    while len(records) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SuiteError(f"could not produce {count} distinct spatial prompts")
        word = rng.choice(vocab.spatial_words)
        noun_a, noun_b = rng.choice(pool), rng.choice(pool)
        if noun_a == noun_b:
            continue
        if word in DIRECTIONAL_WORDS:
            if count - len(records) < 2:
                continue
            first = _spatial_record(f"{prefix}_{index:04d}", split, noun_a, word, noun_b)
            twin = swap_record(first, f"{prefix}_{index + 1:04d}")
            if first.text in seen_texts or twin.text in seen_texts:
                continue
            seen_texts.update((first.text, twin.text))
            records.extend((first, twin))
            index += 2
        else:
            record = _spatial_record(f"{prefix}_{index:04d}", split, noun_a, word, noun_b)
            if record.text in seen_texts:
                continue
            seen_texts.add(record.text)
            records.append(record)
            index += 1
    return records
