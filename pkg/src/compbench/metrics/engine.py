"""Suite-level evaluation: fan out (prompt, image, metric) scoring jobs,
skip what a previous run already scored, and aggregate per prompt and
per category.

Score stores are JSON-lines of MetricScore written in a deterministic order
with canonical serialization, so two runs over the same inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

from ..backends.base import BackendSet, ImageRef
from ..suite.types import PromptRecord
from .llm import CotPromptSet, default_cot_prompts, mgpt_cot_score, mgpt_score
from .scoring import blip_clip_score, bvqa_score, clip_score, three_in_one, unidet_metric
from .types import METRIC_NAMES, MetricConfig, MetricError, MetricInapplicable, MetricScore

PathLike = Union[str, Path]

REQUIRED_BACKENDS = {
    "b_vqa": ("vqa",),
    "clip": ("embedder",),
    "b_clip": ("captioner", "embedder"),
    "unidet": ("detector",),
    "three_in_one": ("vqa", "detector", "embedder"),
    "mgpt": ("chat",),
    "mgpt_cot": ("chat",),
}


@dataclass
class ImageIndex:
    """prompt_id -> generated images, as a single JSON document on disk."""

    images: dict[str, list[ImageRef]] = field(default_factory=dict)

    def for_prompt(self, prompt_id: str) -> list[ImageRef]:
        return self.images.get(prompt_id, [])

    def add(self, prompt_id: str, refs: list[ImageRef]) -> None:
        self.images.setdefault(prompt_id, []).extend(refs)

    def all_images(self) -> dict[str, ImageRef]:
        return {ref.id: ref for refs in self.images.values() for ref in refs}

    def save(self, path: PathLike) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "images": {pid: [r.to_dict() for r in refs] for pid, refs in self.images.items()}
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "ImageIndex":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            images={
                pid: [ImageRef.from_dict(r) for r in refs]
                for pid, refs in data["images"].items()
            }
        )


def build_image_index(
    records: list[PromptRecord], backends: BackendSet, k: int, seed: int
) -> ImageIndex:
    """Generate k images per prompt through the generator backend."""
    if backends.generator is None:
        raise MetricError("image generation needs a generator backend")
    index = ImageIndex()
    for record in records:
        index.add(record.id, backends.generator.generate(record.text, seed, k))
    return index


class ScoreStore:
    """Append-only JSONL of MetricScore, idempotent per (prompt, image, metric)."""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self.scores: dict[tuple[str, str, str], MetricScore] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                score = MetricScore.from_dict(json.loads(line))
                self.scores[(score.prompt_id, score.image_id, score.metric)] = score

    def __contains__(self, key: tuple[str, str, str]) -> bool:
        return key in self.scores

    def __len__(self) -> int:
        return len(self.scores)

    def append(self, scores: list[MetricScore]) -> None:
        new = [
            s for s in scores if (s.prompt_id, s.image_id, s.metric) not in self.scores
        ]
        if not new:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            for score in new:
                self.scores[(score.prompt_id, score.image_id, score.metric)] = score
                fh.write(json.dumps(score.to_dict(), sort_keys=True) + "\n")


@dataclass
class EvaluationResult:
    scores: list[MetricScore]
    per_prompt: dict[str, dict[str, float]]  # prompt_id -> metric -> mean
    per_category: dict[str, dict[str, float]]  # category -> metric -> mean
    missing_images: list[str]
    inapplicable: list[dict[str, str]]
    backend_descriptors: list[dict[str, str]]

    def summary_dict(self) -> dict[str, Any]:
        return {
            "per_prompt": self.per_prompt,
            "per_category": self.per_category,
            "missing_images": self.missing_images,
            "inapplicable": self.inapplicable,
            "backends": self.backend_descriptors,
            "score_count": len(self.scores),
        }


def _score_one(
    metric: str,
    image: ImageRef,
    record: PromptRecord,
    backends: BackendSet,
    cfg: MetricConfig,
    prompts: CotPromptSet,
) -> MetricScore:
    if metric == "b_vqa":
        return bvqa_score(image, record, backends, cfg)
    if metric == "clip":
        return clip_score(image, record.text, backends, record.id)
    if metric == "b_clip":
        return blip_clip_score(image, record.text, backends, record.id)
    if metric == "unidet":
        return unidet_metric(image, record, backends, cfg)
    if metric == "three_in_one":
        return three_in_one(image, record, backends, cfg)
    if metric == "mgpt":
        return mgpt_score(image, record, backends)
    if metric == "mgpt_cot":
        return mgpt_cot_score(image, record, backends, prompts)
    raise MetricError(f"unknown metric: {metric!r}")


def _check_backends(metrics: list[str], backends: BackendSet) -> None:
    for metric in metrics:
        if metric not in METRIC_NAMES:
            raise MetricError(f"unknown metric: {metric!r}")
        for role in REQUIRED_BACKENDS[metric]:
            if getattr(backends, role) is None:
                raise MetricError(f"metric {metric!r} needs the {role!r} backend")


def evaluate_suite(
    records: list[PromptRecord],
    index: ImageIndex,
    metrics: list[str],
    backends: BackendSet,
    cfg: Optional[MetricConfig] = None,
    store: Optional[ScoreStore] = None,
    workers: int = 1,
    prompts: Optional[CotPromptSet] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> EvaluationResult:
    """Score every (prompt, image, metric) triple not already in the store.

    Jobs run on a thread pool; backends that declare serialized access are
    funneled through a per-backend lock. Results are written to the store in
    deterministic job order regardless of completion order.
    """
    cfg = cfg or MetricConfig()
    prompts = prompts or default_cot_prompts()
    _check_backends(metrics, backends)

    missing_images = [r.id for r in records if not index.for_prompt(r.id)]
    inapplicable: list[dict[str, str]] = []
    jobs: list[tuple[str, ImageRef, PromptRecord]] = []
    cached: list[MetricScore] = []
    for record in records:
        for image in index.for_prompt(record.id):
            for metric in metrics:
                key = (record.id, image.id, metric)
                if store is not None and key in store:
                    cached.append(store.scores[key])
                else:
                    jobs.append((metric, image, record))

    locks: dict[int, threading.Lock] = {}

    def lock_for(metric: str):
        for role in REQUIRED_BACKENDS[metric]:
            backend = getattr(backends, role)
            if backend is not None and getattr(backend, "serialized", False):
                return locks.setdefault(id(backend), threading.Lock())
        return nullcontext()

    done = 0
    total = len(jobs)

    def run_job(job):
        nonlocal done
        metric, image, record = job
        try:
            with lock_for(metric):
                result = _score_one(metric, image, record, backends, cfg, prompts)
        except MetricInapplicable as err:
            result = {"prompt_id": record.id, "image_id": image.id, "metric": metric,
                      "reason": str(err)}
        if progress is not None:
            done += 1
            progress(done, total)
        return result

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_job, jobs))
    else:
        outcomes = [run_job(job) for job in jobs]

    new_scores: list[MetricScore] = []
    for outcome in outcomes:
        if isinstance(outcome, MetricScore):
            new_scores.append(outcome)
        else:
            inapplicable.append(outcome)
    if store is not None:
        store.append(new_scores)

    all_scores = cached + new_scores
    per_prompt = _per_prompt_means(records, all_scores, metrics)
    per_category = _per_category_means(records, per_prompt, metrics)
    return EvaluationResult(
        scores=all_scores,
        per_prompt=per_prompt,
        per_category=per_category,
        missing_images=missing_images,
        inapplicable=inapplicable,
        backend_descriptors=[d.to_dict() for d in backends.descriptors()],
    )


def _per_prompt_means(
    records: list[PromptRecord], scores: list[MetricScore], metrics: list[str]
) -> dict[str, dict[str, float]]:
    by_prompt: dict[str, dict[str, list[float]]] = {}
    for score in scores:
        by_prompt.setdefault(score.prompt_id, {}).setdefault(score.metric, []).append(score.value)
    out: dict[str, dict[str, float]] = {}
    for record in records:
        values = by_prompt.get(record.id)
        if not values:
            continue
        out[record.id] = {
            metric: sum(vals) / len(vals)
            for metric, vals in values.items()
        }
    return out


def _per_category_means(
    records: list[PromptRecord],
    per_prompt: dict[str, dict[str, float]],
    metrics: list[str],
) -> dict[str, dict[str, float]]:
    categories: dict[str, dict[str, list[float]]] = {}
    for record in records:
        prompt_means = per_prompt.get(record.id)
        if not prompt_means:
            continue
        for metric, value in prompt_means.items():
            categories.setdefault(record.category, {}).setdefault(metric, []).append(value)
    return {
        category: {metric: sum(vals) / len(vals) for metric, vals in metric_values.items()}
        for category, metric_values in categories.items()
    }
