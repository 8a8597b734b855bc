"""Fixed-template attribute prompt generation.

Template prompts all read "a {adj} {noun} and a {adj} {noun}", with the
article agreeing with the following word (vowel-initial -> "an"). The same
rendering is the round-trip check: a template record's text is always
reproducible from its structured objects.
"""

from __future__ import annotations

import random
from typing import Iterable, Optional

from .types import (
    ATTRIBUTE_CATEGORIES,
    AttributeSpec,
    ObjectSpec,
    PromptRecord,
    SuiteError,
    Vocabulary,
)

VOWELS = "aeiou"


def article(phrase: str) -> str:
    return "an" if phrase[:1].lower() in VOWELS else "a"


def noun_phrase(obj: ObjectSpec) -> str:
    """Render one object as an article-prefixed phrase, e.g. "a big, green apple"."""
    adjs = ", ".join(a.value for a in obj.attributes)
    body = f"{adjs} {obj.noun}" if adjs else obj.noun
    return f"{article(body)} {body}"


def render_attribute_text(objects: Iterable[ObjectSpec]) -> str:
    return " and ".join(noun_phrase(o) for o in objects)


def render_spatial_text(noun_a: str, word: str, noun_b: str) -> str:
    return f"{article(noun_a)} {noun_a} {word} {article(noun_b)} {noun_b}"


def render_template_text(record: PromptRecord) -> str:
    """Reconstruct a template record's text from its structure."""
    spatial = record.spatial_relations()
    if spatial:
        rel = spatial[0]
        return render_spatial_text(
            record.objects[rel.subject_index].noun,
            rel.word,
            record.objects[rel.object_index].noun,
        )
    return render_attribute_text(record.objects)


def attribute_pair_pool(category: str, vocab: Vocabulary) -> list[tuple[str, str]]:
    """All (adj, noun) pairs the template generator may draw for a category."""
    if category == "texture":
        return [(tex, noun) for tex, nouns in vocab.textures.items() for noun in nouns]
    if category == "color":
        return [(c, n) for c in vocab.colors for n in vocab.nouns]
    if category == "shape":
        return [(s, n) for s in vocab.shapes for n in vocab.nouns]
    raise SuiteError(f"not an attribute category: {category!r}")


def _record_from_pairs(
    record_id: str,
    category: str,
    split: str,
    pair_a: tuple[str, str],
    pair_b: tuple[str, str],
) -> PromptRecord:
    objects = (
        ObjectSpec(noun=pair_a[1], attributes=(AttributeSpec(category, pair_a[0]),)),
        ObjectSpec(noun=pair_b[1], attributes=(AttributeSpec(category, pair_b[0]),)),
    )
    return PromptRecord(
        id=record_id,
        category=category,
        split=split,
        text=render_attribute_text(objects),
        objects=objects,
        source="template",
    )


def generate_template_attribute_prompts(
    category: str,
    vocab: Vocabulary,
    seed: int,
    count: int,
    split: str = "train",
    pair_pool: Optional[list[tuple[str, str]]] = None,
    used_texts: Optional[set[str]] = None,
    id_prefix: Optional[str] = None,
    id_start: int = 0,
) -> list[PromptRecord]:
    """Generate `count` distinct two-object template prompts for one category.

    Deterministic for a fixed (vocab, seed, count). `pair_pool` restricts the
    (adj, noun) pairs drawn (used by the suite builder to control seen/unseen
    compositions); `used_texts` is extended in place so callers can forbid
    duplicates across batches.
    """
    if count < 1:
        raise SuiteError("count must be >= 1")
    pool = pair_pool if pair_pool is not None else attribute_pair_pool(category, vocab)
    if not pool:
        raise SuiteError(f"empty vocabulary for category {category!r}")

    rng = random.Random(seed)
    seen_texts = used_texts if used_texts is not None else set()
    prefix = id_prefix or f"{category}_{split}"
    records: list[PromptRecord] = []
    attempts = 0
    max_attempts = max(10_000, count * 200)
    index = id_start
    while len(records) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SuiteError(
                f"could not produce {count} distinct {category} prompts "
                f"from a pool of {len(pool)} pairs"
            )
        pair_a, pair_b = rng.choice(pool), rng.choice(pool)
        if pair_a == pair_b or pair_a[1] == pair_b[1]:
            continue
        record = _record_from_pairs(f"{prefix}_{index:04d}", category, split, pair_a, pair_b)
        if record.text in seen_texts:
            continue
        seen_texts.add(record.text)
        records.append(record)
        index += 1
    return records
