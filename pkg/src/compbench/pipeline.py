"""Run orchestration shared by the HTTP service and the CLI.

A run is reproducible from its output directory alone: the frozen config,
the backend descriptors, the score store, and the summary all land there.
Backend mode is one of fake / replay / live; any mode can additionally
record its responses into a cache for later replay.
"""

from __future__ import annotations

import importlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .backends import (
    BackendSet,
    ReplayCache,
    fake_backend_set,
    recording_backend_set,
    replay_backend_set,
)
from .gors import SelectionConfig, build_manifest, generate_and_score, median_thresholds, select
from .metrics import ImageIndex, MetricConfig, MetricScore, ScoreStore, build_image_index, evaluate_suite
from .report import correlation_rows, render_correlation_table
from .stats import StatsError, correlate_metric
from .suite import SuiteManifest, load_manifest
from .suite.types import CATEGORIES, PromptRecord

PathLike = Union[str, Path]

CACHE_ENV_VAR = "COMPBENCH_CACHE"
LIVE_BACKENDS_ENV_VAR = "COMPBENCH_LIVE_BACKENDS"

BACKEND_MODES = ("fake", "replay", "live")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class UnknownNameError(ConfigError):
    """A metric or category name that does not exist."""


@dataclass
class RunConfig:
    suite: str = ""
    images: Optional[str] = None
    metrics: list[str] = field(default_factory=lambda: ["b_vqa"])
    backend_mode: str = "fake"
    replay_cache: Optional[str] = None
    record_cache: Optional[str] = None
    out: str = "runs/run"
    seed: int = 0
    workers: int = 0  # 0 means one per processor
    categories: Optional[list[str]] = None
    split: Optional[str] = None
    limit_per_category: Optional[int] = None
    images_per_prompt: int = 10

    def __post_init__(self):
        if self.backend_mode not in BACKEND_MODES:
            raise ConfigError(f"backend_mode must be one of {BACKEND_MODES}")
        if self.backend_mode == "replay" and not self.effective_cache_path():
            raise ConfigError("replay mode requires a cache path (--replay-cache or "
                              f"{CACHE_ENV_VAR})")
        if self.categories:
            unknown = set(self.categories) - set(CATEGORIES)
            if unknown:
                raise UnknownNameError(f"unknown categories: {sorted(unknown)}")

    def effective_cache_path(self) -> Optional[str]:
        return self.replay_cache or os.environ.get(CACHE_ENV_VAR)

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    @classmethod
    def from_file(cls, path: PathLike, overrides: Optional[dict[str, Any]] = None) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        merged = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
        return cls.from_dict(merged)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}  # noqa: C416
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def resolve_backends(
    mode: str,
    seed: int,
    replay_cache: Optional[PathLike] = None,
    record_cache: Optional[PathLike] = None,
    images_dir: Optional[PathLike] = None,
) -> BackendSet:
    """Build the BackendSet for a run; any mode may also record to a cache."""
    if mode == "fake":
        backends = fake_backend_set(seed=seed, out_dir=Path(images_dir) if images_dir else None)
    elif mode == "replay":
        if not replay_cache:
            raise ConfigError("replay mode requires a cache path")
        backends = replay_backend_set(ReplayCache(replay_cache))
    elif mode == "live":
        module_path = os.environ.get(LIVE_BACKENDS_ENV_VAR)
        if not module_path:
            raise ConfigError(
                "live mode needs a backend plugin: set "
                f"{LIVE_BACKENDS_ENV_VAR} to a module exposing build_backends(seed)"
            )
        module = importlib.import_module(module_path)
        backends = module.build_backends(seed)
    else:
        raise ConfigError(f"unknown backend mode: {mode!r}")
    if record_cache:
        backends = recording_backend_set(backends, ReplayCache(record_cache))
    return backends


def select_records(
    manifest: SuiteManifest,
    categories: Optional[list[str]] = None,
    split: Optional[str] = None,
    limit_per_category: Optional[int] = None,
) -> list[PromptRecord]:
    records = manifest.records
    if categories:
        records = [r for r in records if r.category in categories]
    if split:
        records = [r for r in records if r.split == split]
    if limit_per_category:
        trimmed: list[PromptRecord] = []
        counts: dict[str, int] = {}
        for record in records:
            if counts.get(record.category, 0) < limit_per_category:
                trimmed.append(record)
                counts[record.category] = counts.get(record.category, 0) + 1
        records = trimmed
    return records


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_evaluate(cfg: RunConfig) -> dict[str, Any]:
    """Evaluate a suite and leave a reproducible run directory behind."""
    out = Path(cfg.out)
    manifest = load_manifest(cfg.suite)
    records = select_records(manifest, cfg.categories, cfg.split, cfg.limit_per_category)
    if not records:
        raise ConfigError("no prompts selected")

    backends = resolve_backends(
        cfg.backend_mode,
        cfg.seed,
        replay_cache=cfg.effective_cache_path(),
        record_cache=cfg.record_cache,
        images_dir=out / "images" if cfg.images is None else None,
    )

    if cfg.images:
        index = ImageIndex.load(cfg.images)
    else:
        if backends.generator is None:
            raise ConfigError("no image index given and the backend set cannot generate")
        index = build_image_index(records, backends, k=cfg.images_per_prompt, seed=cfg.seed)
        index.save(out / "image_index.json")

    store = ScoreStore(out / "scores.jsonl")
    result = evaluate_suite(
        records,
        index,
        cfg.metrics,
        backends,
        cfg=MetricConfig(),
        store=store,
        workers=cfg.effective_workers(),
    )

    _write_json(out / "config.json", asdict(cfg))
    _write_json(out / "backends.json", result.backend_descriptors)
    summary = result.summary_dict()
    _write_json(out / "summary.json", summary)
    return {
        "out_dir": str(out),
        "score_store": str(out / "scores.jsonl"),
        "summary": summary,
    }


@dataclass
class GorsRunConfig:
    suite: str = ""
    out: str = "runs/gors"
    backend_mode: str = "fake"
    replay_cache: Optional[str] = None
    record_cache: Optional[str] = None
    seed: int = 0
    k_per_prompt: int = 10
    threshold: Optional[float] = None  # one value for all categories
    thresholds: Optional[dict[str, float]] = None
    ablation: str = "none"  # none | half | zero
    categories: Optional[list[str]] = None
    split: Optional[str] = None
    limit_per_category: Optional[int] = None

    def __post_init__(self):
        if self.ablation not in ("none", "half", "zero"):
            raise ConfigError("ablation must be none, half, or zero")
        if self.backend_mode not in BACKEND_MODES:
            raise ConfigError(f"backend_mode must be one of {BACKEND_MODES}")


def run_gors_select(cfg: GorsRunConfig) -> dict[str, Any]:
    """Generate, score, select, and emit a fine-tuning manifest."""
    out = Path(cfg.out)
    manifest = load_manifest(cfg.suite)
    records = select_records(manifest, cfg.categories, cfg.split, cfg.limit_per_category)
    if not records:
        raise ConfigError("no prompts selected")

    backends = resolve_backends(
        cfg.backend_mode,
        cfg.seed,
        replay_cache=cfg.replay_cache or os.environ.get(CACHE_ENV_VAR),
        record_cache=cfg.record_cache,
        images_dir=out / "images",
    )
    selection_cfg = SelectionConfig(k_per_prompt=cfg.k_per_prompt, seed=cfg.seed)
    samples, index, failures = generate_and_score(records, backends, selection_cfg)
    if not samples:
        raise ConfigError("no samples produced; check the suite and backends")

    if cfg.thresholds is not None:
        thresholds = dict(cfg.thresholds)
    elif cfg.threshold is not None:
        thresholds = {c: cfg.threshold for c in CATEGORIES}
    else:
        thresholds = {**{c: 0.5 for c in CATEGORIES}, **median_thresholds(samples)}
    selection_cfg.thresholds = thresholds
    if cfg.ablation == "half":
        selection_cfg = selection_cfg.with_halved_thresholds()
    elif cfg.ablation == "zero":
        selection_cfg = selection_cfg.with_zero_thresholds()

    selected = select(samples, selection_cfg)
    index.save(out / "image_index.json")
    _write_json(out / "samples.json", [s.to_dict() for s in samples])
    _write_json(out / "config.json", asdict(cfg))
    result: dict[str, Any] = {
        "out_dir": str(out),
        "sample_count": len(samples),
        "selected_count": len(selected),
        "thresholds": selection_cfg.thresholds,
        "failures": failures,
        "empty_selection": not selected,
    }
    if selected:
        training = build_manifest(selected, selection_cfg)
        training.save(out / "training_manifest.json")
        result["manifest_path"] = str(out / "training_manifest.json")
    return result


def load_scores(path: PathLike) -> list[MetricScore]:
    scores = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            scores.append(MetricScore.from_dict(json.loads(line)))
    return scores


def run_correlate(
    scores_path: PathLike,
    ratings_path: PathLike,
    include_incomplete: bool = False,
) -> dict[str, Any]:
    """Join a score store against exported human ratings, per (metric, category)."""
    scores = load_scores(scores_path)
    export = json.loads(Path(ratings_path).read_text(encoding="utf-8"))
    if isinstance(export, dict):
        export = export["entries"]

    human: dict[tuple[str, str], float] = {}
    category_of: dict[tuple[str, str], str] = {}
    for entry in export:
        if entry["human_score"] is None:
            continue
        if not entry["complete"] and not include_incomplete:
            continue
        key = (entry["prompt_id"], entry["image_id"])
        human[key] = entry["human_score"]
        category_of[key] = entry["category"]

    grouped: dict[tuple[str, str], dict[tuple[str, str], float]] = {}
    for score in scores:
        key = (score.prompt_id, score.image_id)
        if key not in human:
            continue
        grouped.setdefault((score.metric, category_of[key]), {})[key] = score.value

    results = {}
    skipped = []
    for group, metric_scores in sorted(grouped.items()):
        relevant_human = {k: human[k] for k in metric_scores}
        try:
            results[group] = correlate_metric(metric_scores, relevant_human)
        except StatsError as err:
            skipped.append({"metric": group[0], "category": group[1], "reason": str(err)})
    if not results and not skipped:
        raise StatsError("no joined (prompt, image) pairs between scores and ratings")
    rows = correlation_rows(results)
    return {
        "rows": rows,
        "skipped": skipped,
        "table": render_correlation_table(rows) if rows else "",
    }
