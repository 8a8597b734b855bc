"""Rule-based stand-ins for the naturally-phrased benchmark slices.

The official benchmark distributes LLM-authored prompt lists for the natural
attribute prompts and the non-spatial and complex categories. Those lists are
ingested through `io.load_prompt_file` when available; these generators
produce structurally equivalent prompts offline so the full suite can be
built, validated, and evaluated without the distributed files.
"""

from __future__ import annotations

import random
from typing import Optional

from .types import (
    AttributeSpec,
    ObjectSpec,
    PromptRecord,
    RelationSpec,
    SuiteError,
    Vocabulary,
)
from .template import article, noun_phrase

NATURAL_ATTRIBUTE_PATTERNS = (
    "a room with {a} and {b}",
    "{a} next to {b} in the garden",
    "{a} beside {b} on the street",
    "a photo of {a} and {b}",
    "{a} and {b} on the table",
    "{a} placed near {b}",
    "a scene with {a} and {b}",
    "{a} in front of {b}",
)


def _pair_phrase(kind: str, value: str, noun: str) -> str:
    body = f"{value} {noun}"
    return f"{article(body)} {body}"


def generate_natural_attribute_prompts(
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
    """Naturally-phrased two-object attribute prompts (source tagged chatgpt)."""
    if count < 1:
        raise SuiteError("count must be >= 1")
    from .template import attribute_pair_pool

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
            raise SuiteError(f"could not produce {count} distinct natural {category} prompts")
        pair_a, pair_b = rng.choice(pool), rng.choice(pool)
        if pair_a == pair_b or pair_a[1] == pair_b[1]:
            continue
        pattern = rng.choice(NATURAL_ATTRIBUTE_PATTERNS)
        text = pattern.format(
            a=_pair_phrase(category, *pair_a), b=_pair_phrase(category, *pair_b)
        )
        if text in seen_texts:
            continue
        seen_texts.add(text)
        records.append(
            PromptRecord(
                id=f"{prefix}_{index:04d}",
                category=category,
                split=split,
                text=text,
                objects=(
                    ObjectSpec(pair_a[1], (AttributeSpec(category, pair_a[0]),)),
                    ObjectSpec(pair_b[1], (AttributeSpec(category, pair_b[0]),)),
                ),
                source="chatgpt",
            )
        )
        index += 1
    return records


def generate_non_spatial_prompts(
    vocab: Vocabulary,
    seed: int,
    count: int,
    split: str = "train",
    used_texts: Optional[set[str]] = None,
    id_prefix: Optional[str] = None,
) -> list[PromptRecord]:
    """Two-object interaction prompts, e.g. "a girl holding an umbrella"."""
    if count < 1:
        raise SuiteError("count must be >= 1")
    if not vocab.non_spatial_words:
        raise SuiteError("empty non-spatial relation word list")
    subjects = vocab.persons + vocab.animals
    targets = vocab.spatial_noun_pool() + vocab.nouns

    rng = random.Random(seed)
    seen_texts = used_texts if used_texts is not None else set()
    prefix = id_prefix or f"non_spatial_{split}"
    records: list[PromptRecord] = []
    attempts = 0
    max_attempts = max(10_000, count * 200)
    index = 0
    while len(records) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SuiteError(f"could not produce {count} distinct non-spatial prompts")
        subject, target = rng.choice(subjects), rng.choice(targets)
        if subject == target:
            continue
        word = rng.choice(vocab.non_spatial_words)
        text = f"{article(subject)} {subject} {word} {article(target)} {target}"
        if text in seen_texts:
            continue
        seen_texts.add(text)
        records.append(
            PromptRecord(
                id=f"{prefix}_{index:04d}",
                category="non_spatial",
                split=split,
                text=text,
                objects=(ObjectSpec(subject), ObjectSpec(target)),
                relations=(RelationSpec(0, 1, word, "non_spatial"),),
                source="chatgpt",
            )
        )
        index += 1
    return records


# The four complex scenarios: object count x attribute style.
COMPLEX_SCENARIOS = (
    ("two", "multiple"),
    ("two", "mixed"),
    ("many", "multiple"),
    ("many", "mixed"),
)


def _draw_attributed_object(rng: random.Random, vocab: Vocabulary, n_attrs: int) -> ObjectSpec:
    kinds = rng.sample(("color", "shape", "texture"), n_attrs)
    if "texture" in kinds:
        texture = rng.choice(tuple(vocab.textures))
        noun = rng.choice(vocab.textures[texture])
    else:
        texture = None
        noun = rng.choice(vocab.nouns)
    attrs = []
    for kind in kinds:
        if kind == "color":
            attrs.append(AttributeSpec("color", rng.choice(vocab.colors)))
        elif kind == "shape":
            attrs.append(AttributeSpec("shape", rng.choice(vocab.shapes)))
        else:
            attrs.append(AttributeSpec("texture", texture))
    return ObjectSpec(noun, tuple(attrs))


def generate_complex_prompts(
    vocab: Vocabulary,
    seed: int,
    count: int,
    split: str = "train",
    used_texts: Optional[set[str]] = None,
    id_prefix: Optional[str] = None,
) -> list[PromptRecord]:
    """Complex compositions: >=2 objects, multiple/mixed attributes, optional relation.

    `count` is spread as evenly as possible over the four scenarios
    (two/many objects x multiple/mixed attributes).
    """
    if count < 1:
        raise SuiteError("count must be >= 1")

    rng = random.Random(seed)
    seen_texts = used_texts if used_texts is not None else set()
    prefix = id_prefix or f"complex_{split}"
    records: list[PromptRecord] = []
    quotas = [count // 4 + (1 if i < count % 4 else 0) for i in range(4)]
    attempts = 0
    max_attempts = max(10_000, count * 200)
    index = 0
    for quota, (scenario_objects, scenario_attrs) in zip(quotas, COMPLEX_SCENARIOS):
        produced = 0
        while produced < quota:
            attempts += 1
            if attempts > max_attempts:
                raise SuiteError(f"could not produce {count} distinct complex prompts")
            n_objects = 2 if scenario_objects == "two" else rng.choice((3, 4))
            n_attrs = 2 if scenario_attrs == "multiple" else 1
            objects = tuple(_draw_attributed_object(rng, vocab, n_attrs) for _ in range(n_objects))
            if len({o.noun for o in objects}) != n_objects:
                continue
            relations: tuple[RelationSpec, ...] = ()
            phrases = [noun_phrase(o) for o in objects]
            if rng.random() < 0.5:
                if rng.random() < 0.5:
                    word, kind = rng.choice(vocab.spatial_words), "spatial"
                else:
                    word, kind = rng.choice(vocab.non_spatial_words), "non_spatial"
                relations = (RelationSpec(0, 1, word, kind),)
                head = f"{phrases[0]} {word} {phrases[1]}"
                rest = phrases[2:]
            else:
                head = f"{phrases[0]} and {phrases[1]}" if n_objects == 2 else phrases[0]
                rest = phrases[1:] if n_objects > 2 else []
            if rest:
                text = ", ".join([head] + rest[:-1]) + f" and {rest[-1]}"
            else:
                text = head
            if text in seen_texts:
                continue
            seen_texts.add(text)
            records.append(
                PromptRecord(
                    id=f"{prefix}_{index:04d}",
                    category="complex",
                    split=split,
                    text=text,
                    objects=objects,
                    relations=relations,
                    source="chatgpt",
                )
            )
            produced += 1
            index += 1
    return records
