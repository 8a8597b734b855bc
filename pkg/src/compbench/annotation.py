"""Human-rating task queue with an append-only event log.

Every state change (batch creation, rating submission) is one JSON line in
the log; replaying the log reconstructs the exact service state, which keeps
one-shot CLI invocations and a long-running server equally coherent. Task
assignment and rating insertion are serialized through a single lock so no
(task, worker) slot is ever rated twice.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .metrics.engine import ImageIndex
from .stats import aggregate_human
from .suite.types import CATEGORIES, PromptRecord


class AnnotationError(ValueError):
    """Rejected request: bad score, duplicate rating, unknown task."""


@dataclass
class AnnotationTask:
    task_id: str
    batch_id: str
    model: str
    prompt_id: str
    image_id: str
    category: str
    prompt_text: str
    image_locator: str
    ratings_needed: int = 3

    def __post_init__(self):
        if self.ratings_needed < 1:
            raise AnnotationError("ratings_needed must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "batch_id": self.batch_id,
            "model": self.model,
            "prompt_id": self.prompt_id,
            "image_id": self.image_id,
            "category": self.category,
            "prompt_text": self.prompt_text,
            "image_locator": self.image_locator,
            "ratings_needed": self.ratings_needed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AnnotationTask":
        return cls(**data)


@dataclass(frozen=True)
class RatingRecord:
    task_id: str
    worker_id: str
    score: int
    timestamp: float

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise AnnotationError(f"score must be in 1..5, got {self.score!r}")
        if not self.worker_id:
            raise AnnotationError("worker_id must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "worker_id": self.worker_id,
            "score": self.score,
            "timestamp": self.timestamp,
        }


def create_batch(
    batch_id: str,
    records: Sequence[PromptRecord],
    image_indexes: dict[str, ImageIndex],
    images_per_prompt: int = 2,
    prompts_per_cell: int = 25,
    seed: int = 0,
    ratings_needed: int = 3,
    categories: Optional[Sequence[str]] = None,
) -> list[AnnotationTask]:
    """Sample (prompts_per_cell x images_per_prompt) tasks per (model, category) cell.

    Only prompts with at least images_per_prompt generated images qualify; a
    short cell is an error naming the shortfall. Sampling is seeded so the
    same request always yields the same batch.
    """
    rng = random.Random(seed)
    wanted = list(categories) if categories else [c for c in CATEGORIES]
    by_category: dict[str, list[PromptRecord]] = {c: [] for c in wanted}
    for record in records:
        if record.category in by_category:
            by_category[record.category].append(record)

    tasks: list[AnnotationTask] = []
    for model in sorted(image_indexes):
        index = image_indexes[model]
        for category in wanted:
            eligible = [
                r for r in by_category[category]
                if len(index.for_prompt(r.id)) >= images_per_prompt
            ]
            if len(eligible) < prompts_per_cell:
                raise AnnotationError(
                    f"model {model!r} category {category!r}: {len(eligible)} prompts "
                    f"with >= {images_per_prompt} images, need {prompts_per_cell}"
                )
            chosen = rng.sample(eligible, prompts_per_cell)
            for record in chosen:
                refs = rng.sample(index.for_prompt(record.id), images_per_prompt)
                for ref in refs:
                    tasks.append(
                        AnnotationTask(
                            task_id=f"{batch_id}_{model}_{record.id}_{ref.id}",
                            batch_id=batch_id,
                            model=model,
                            prompt_id=record.id,
                            image_id=ref.id,
                            category=category,
                            prompt_text=record.text,
                            image_locator=ref.locator,
                            ratings_needed=ratings_needed,
                        )
                    )
    return tasks


class AnnotationStore:
    """In-memory service state rebuilt from the event log on startup."""

    def __init__(self, log_path: Optional[Union[str, Path]] = None):
        self.log_path = Path(log_path) if log_path else None
        self._lock = threading.Lock()
        self.tasks: dict[str, AnnotationTask] = {}
        self.task_order: list[str] = []
        self.ratings: list[RatingRecord] = []
        self._raters: dict[str, set[str]] = {}  # task_id -> worker ids
        if self.log_path and self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line))

    # -- event handling ----------------------------------------------------

    def _apply(self, event: dict[str, Any]) -> None:
        if event["event"] == "task":
            task = AnnotationTask.from_dict(event["task"])
            self.tasks[task.task_id] = task
            self.task_order.append(task.task_id)
            self._raters.setdefault(task.task_id, set())
        elif event["event"] == "rating":
            record = RatingRecord(
                task_id=event["task_id"],
                worker_id=event["worker_id"],
                score=event["score"],
                timestamp=event["timestamp"],
            )
            self.ratings.append(record)
            self._raters.setdefault(record.task_id, set()).add(record.worker_id)
        else:
            raise AnnotationError(f"unknown event type: {event['event']!r}")

    def _append(self, event: dict[str, Any]) -> None:
        self._apply(event)
        if self.log_path:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    # -- operations ---------------------------------------------------------

    def add_tasks(self, tasks: Sequence[AnnotationTask]) -> None:
        with self._lock:
            for task in tasks:
                if task.task_id in self.tasks:
                    raise AnnotationError(f"duplicate task id: {task.task_id}")
            for task in tasks:
                self._append({"event": "task", "task": task.to_dict()})

    def rating_count(self, task_id: str) -> int:
        return len(self._raters.get(task_id, ()))

    def is_complete(self, task_id: str) -> bool:
        task = self.tasks[task_id]
        return self.rating_count(task_id) >= task.ratings_needed

    def next_task(self, worker_id: str, batch_id: Optional[str] = None) -> Optional[AnnotationTask]:
        """First incomplete task this worker has not rated, or None."""
        if not worker_id:
            raise AnnotationError("worker_id must be non-empty")
        with self._lock:
            for task_id in self.task_order:
                task = self.tasks[task_id]
                if batch_id and task.batch_id != batch_id:
                    continue
                if self.is_complete(task_id):
                    continue
                if worker_id in self._raters.get(task_id, ()):
                    continue
                return task
        return None

    def submit_rating(
        self, task_id: str, worker_id: str, score: int, timestamp: Optional[float] = None
    ) -> RatingRecord:
        with self._lock:
            if task_id not in self.tasks:
                raise AnnotationError(f"unknown task: {task_id}")
            if score not in (1, 2, 3, 4, 5):
                raise AnnotationError(f"score must be in 1..5, got {score!r}")
            if not worker_id:
                raise AnnotationError("worker_id must be non-empty")
            if worker_id in self._raters.get(task_id, ()):
                raise AnnotationError(f"worker {worker_id!r} already rated task {task_id}")
            if self.is_complete(task_id):
                raise AnnotationError(f"task {task_id} already has all its ratings")
            event = {
                "event": "rating",
                "task_id": task_id,
                "worker_id": worker_id,
                "score": score,
                "timestamp": timestamp if timestamp is not None else time.time(),
            }
            self._append(event)
            return self.ratings[-1]

    def worker_progress(self, worker_id: str, batch_id: Optional[str] = None) -> dict[str, int]:
        done = sum(
            1 for r in self.ratings
            if r.worker_id == worker_id
            and (batch_id is None or self.tasks[r.task_id].batch_id == batch_id)
        )
        total = sum(
            1 for t in self.tasks.values() if batch_id is None or t.batch_id == batch_id
        )
        return {"done": done, "total": total}

    def export_ratings(self, batch_id: Optional[str] = None) -> list[dict[str, Any]]:
        """Per-(prompt, image) aggregated human scores; incomplete tasks flagged."""
        by_task: dict[str, list[int]] = {}
        for record in self.ratings:
            by_task.setdefault(record.task_id, []).append(record.score)
        out = []
        for task_id in self.task_order:
            task = self.tasks[task_id]
            if batch_id and task.batch_id != batch_id:
                continue
            scores = by_task.get(task_id, [])
            entry: dict[str, Any] = {
                "task_id": task_id,
                "batch_id": task.batch_id,
                "model": task.model,
                "prompt_id": task.prompt_id,
                "image_id": task.image_id,
                "category": task.category,
                "ratings": sorted(scores),
                "complete": len(scores) >= task.ratings_needed,
            }
            entry["human_score"] = aggregate_human(scores) if scores else None
            out.append(entry)
        return out

    def state_fingerprint(self) -> str:
        """Canonical digest of the full state, for replay verification."""
        import hashlib

        body = json.dumps(
            {
                "tasks": [self.tasks[t].to_dict() for t in self.task_order],
                "ratings": [r.to_dict() for r in self.ratings],
            },
            sort_keys=True,
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()
