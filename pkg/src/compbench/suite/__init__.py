"""Benchmark prompt suite: types, generators, loading, and validation."""

from .types import (
    ATTRIBUTE_CATEGORIES,
    CATEGORIES,
    DIRECTIONAL_WORDS,
    PROXIMITY_WORDS,
    SPATIAL_WORDS,
    AttributeSpec,
    ObjectSpec,
    PromptRecord,
    RelationSpec,
    SuiteError,
    SuiteManifest,
    Vocabulary,
)
from .vocab import default_vocabulary
from .template import (
    article,
    attribute_pair_pool,
    generate_template_attribute_prompts,
    noun_phrase,
    render_template_text,
)
from .spatial import generate_spatial_prompts, swap_record
from .synthetic import (
    generate_complex_prompts,
    generate_natural_attribute_prompts,
    generate_non_spatial_prompts,
)
from .io import (
    load_manifest,
    load_prompt_file,
    save_manifest,
    sidecar_path,
    write_prompt_file,
)
from .validate import ValidationReport, assign_seen_unseen, validate_suite
from .build import build_suite

__all__ = [
    "ATTRIBUTE_CATEGORIES",
    "CATEGORIES",
    "DIRECTIONAL_WORDS",
    "PROXIMITY_WORDS",
    "SPATIAL_WORDS",
    "AttributeSpec",
    "ObjectSpec",
    "PromptRecord",
    "RelationSpec",
    "SuiteError",
    "SuiteManifest",
    "Vocabulary",
    "ValidationReport",
    "article",
    "assign_seen_unseen",
    "attribute_pair_pool",
    "build_suite",
    "default_vocabulary",
    "generate_complex_prompts",
    "generate_natural_attribute_prompts",
    "generate_non_spatial_prompts",
    "generate_spatial_prompts",
    "generate_template_attribute_prompts",
    "load_manifest",
    "load_prompt_file",
    "noun_phrase",
    "render_template_text",
    "save_manifest",
    "sidecar_path",
    "swap_record",
    "validate_suite",
    "write_prompt_file",
]
