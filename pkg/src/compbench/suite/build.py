"""Full-suite construction.

Builds all six sub-categories at once: fixed-template and natural attribute
prompts with a controlled seen/unseen test partition, swap-closed spatial
prompts, and the non-spatial and complex slices (from the rule-based
stand-ins unless official files are ingested separately).
"""

from __future__ import annotations

import random

from .types import ATTRIBUTE_CATEGORIES, PromptRecord, SuiteError, SuiteManifest, Vocabulary
from .template import attribute_pair_pool, generate_template_attribute_prompts
from .spatial import generate_spatial_prompts
from .synthetic import (
    generate_complex_prompts,
    generate_natural_attribute_prompts,
    generate_non_spatial_prompts,
)
from .validate import assign_seen_unseen
from .vocab import default_vocabulary

TEMPLATE_FRACTION = 0.8  # remainder is naturally phrased
UNSEEN_HOLDOUT_PAIRS = 15


def _portion(total: int, fraction: float) -> tuple[int, int]:
    a = round(total * fraction)
    return a, total - a


def _build_attribute_category(
    category: str, vocab: Vocabulary, seed: int, per_category: int
) -> list[PromptRecord]:
    train_n = round(per_category * 0.7)
    test_n = per_category - train_n
    seen_n = round(test_n * 2 / 3)
    unseen_n = test_n - seen_n

    rng = random.Random(seed)
    pool = attribute_pair_pool(category, vocab)
    if len(pool) <= UNSEEN_HOLDOUT_PAIRS:
        raise SuiteError(f"pair pool too small for category {category!r}")
    shuffled = pool[:]
    rng.shuffle(shuffled)
    holdout = shuffled[:UNSEEN_HOLDOUT_PAIRS]
    main = shuffled[UNSEEN_HOLDOUT_PAIRS:]

    used_texts: set[str] = set()

    def batch(generator, count, split, pool, id_start):
        seed_next = rng.randrange(2**32)
        if count < 1:
            return []
        return generator(
            category, vocab, seed_next, count,
            split=split, pair_pool=pool, used_texts=used_texts, id_start=id_start,
        )

    train_template_n, train_natural_n = _portion(train_n, TEMPLATE_FRACTION)
    train = batch(generate_template_attribute_prompts, train_template_n, "train", main, 0)
    train += batch(
        generate_natural_attribute_prompts, train_natural_n, "train", main, train_template_n
    )
    train_used = sorted({pair for r in train for pair in r.pairs})

    seen_template_n, seen_natural_n = _portion(seen_n, TEMPLATE_FRACTION)
    unseen_template_n, unseen_natural_n = _portion(unseen_n, TEMPLATE_FRACTION)
    test = batch(generate_template_attribute_prompts, seen_template_n, "test", train_used, 0)
    test += batch(
        generate_natural_attribute_prompts, seen_natural_n, "test", train_used, len(test)
    )
    test += batch(generate_template_attribute_prompts, unseen_template_n, "test", holdout, len(test))
    test += batch(generate_natural_attribute_prompts, unseen_natural_n, "test", holdout, len(test))

    test = assign_seen_unseen(test, train)
    got_seen = sum(1 for r in test if r.novelty == "seen")
    got_unseen = sum(1 for r in test if r.novelty == "unseen")
    if (got_seen, got_unseen) != (seen_n, unseen_n):
        raise SuiteError(
            f"{category}: built {got_seen} seen / {got_unseen} unseen, "
            f"wanted {seen_n}/{unseen_n}"
        )
    return train + test


def build_suite(
    vocab: Vocabulary | None = None,
    seed: int = 0,
    per_category: int = 1000,
) -> SuiteManifest:
    """Build the complete suite: `per_category` prompts for each sub-category.

    Deterministic for fixed (vocab, seed, per_category). The default size
    gives 700 train / 300 test per sub-category with 200 seen / 100 unseen
    attribute test prompts.
    """
    vocab = vocab or default_vocabulary()
    train_n = round(per_category * 0.7)
    test_n = per_category - train_n
    if train_n % 2 or test_n % 2:
        raise SuiteError("per_category must give even train/test sizes (spatial pairing)")

    records: list[PromptRecord] = []
    for offset, category in enumerate(ATTRIBUTE_CATEGORIES):
        records += _build_attribute_category(category, vocab, seed * 1000 + offset, per_category)

    spatial_texts: set[str] = set()
    records += generate_spatial_prompts(
        vocab, seed * 1000 + 10, train_n, split="train", used_texts=spatial_texts
    )
    records += generate_spatial_prompts(
        vocab, seed * 1000 + 11, test_n, split="test", used_texts=spatial_texts
    )

    ns_texts: set[str] = set()
    records += generate_non_spatial_prompts(
        vocab, seed * 1000 + 20, train_n, split="train", used_texts=ns_texts
    )
    records += generate_non_spatial_prompts(
        vocab, seed * 1000 + 21, test_n, split="test", used_texts=ns_texts
    )

    cx_texts: set[str] = set()
    records += generate_complex_prompts(
        vocab, seed * 1000 + 30, train_n, split="train", used_texts=cx_texts
    )
    records += generate_complex_prompts(
        vocab, seed * 1000 + 31, test_n, split="test", used_texts=cx_texts
    )
    return SuiteManifest(records=records)
