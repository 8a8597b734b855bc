"""Recorded-response cache: record once, replay forever.

Cache lines are JSON objects {role, model, request_digest, request, response}
appended under a lock. A wrapper in record mode stores every response it sees
(always returning the decoded cached form, so recorded and replayed runs agree
bit for bit); in replay mode a cache miss is an error.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from ..geometry import BBox, Detection
from .base import (
    BackendDescriptor,
    BackendError,
    BackendSet,
    ImageRef,
    canonical_payload,
    request_digest,
)


class ReplayCache:
    """Append-only on-disk map from (role, model, request digest) to response."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str, str], Any] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                key = (entry["role"], entry["model"], entry["request_digest"])
                self._entries[key] = entry["response"]

    def __len__(self) -> int:
        return len(self._entries)

    def roles_and_models(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for role, model, _ in self._entries:
            out.setdefault(role, set()).add(model)
        return out

    def get(self, role: str, model: str, digest: str) -> Any:
        key = (role, model, digest)
        if key not in self._entries:
            raise BackendError(f"replay miss: {role}/{model} request {digest[:12]}…")
        return self._entries[key]

    def contains(self, role: str, model: str, digest: str) -> bool:
        return (role, model, digest) in self._entries

    def put(self, role: str, model: str, digest: str, request: Any, response: Any) -> None:
        key = (role, model, digest)
        with self._lock:
            if key in self._entries:
                if canonical_payload(self._entries[key]) != canonical_payload(response):
                    raise BackendError(f"conflicting responses for cached request {digest[:12]}…")
                return
            self._entries[key] = response
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "role": role,
                            "model": model,
                            "request_digest": digest,
                            "request": request,
                            "response": response,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def _encode_detections(detections: list[Detection]) -> list[dict]:
    return [
        {
            "label": d.label,
            "confidence": d.confidence,
            "bbox": [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
        }
        for d in detections
    ]


def _decode_detections(data: list[dict]) -> list[Detection]:
    return [Detection(d["label"], d["confidence"], BBox(*d["bbox"])) for d in data]


@dataclass
class CachedBackend:
    """Record/replay proxy for any backend role.

    With an inner backend, misses are forwarded and recorded; without one
    (pure replay) a miss raises.
    """

    role: str
    cache: ReplayCache
    inner: Any = None
    model_id: Optional[str] = None
    serialized: bool = False

    def __post_init__(self):
        if self.inner is None and self.model_id is None:
            raise ValueError("pure replay needs an explicit model_id")
        model = self.model_id or self.inner.descriptor.model_id
        implementation = "replay" if self.inner is None else "recorded"
        self.descriptor = BackendDescriptor(self.role, implementation, model)
        if self.inner is not None:
            self.serialized = self.serialized or getattr(self.inner, "serialized", False)

    def _call(self, request: Any, invoke, decode):
        digest = request_digest(self.role, self.descriptor.model_id, request)
        if self.cache.contains(self.role, self.descriptor.model_id, digest):
            return decode(self.cache.get(self.role, self.descriptor.model_id, digest))
        if self.inner is None:
            raise BackendError(
                f"strict replay miss for {self.role} request {canonical_payload(request)[:80]}"
            )
        response = invoke()
        self.cache.put(self.role, self.descriptor.model_id, digest, request, response)
        return decode(self.cache.get(self.role, self.descriptor.model_id, digest))

    # One method per role; only the matching one is ever called.
    def vqa_yes_probability(self, image: ImageRef, question: str) -> float:
        request = {"op": "vqa", "image": image.digest, "question": question}
        return self._call(
            request, lambda: float(self.inner.vqa_yes_probability(image, question)), float
        )

    def caption(self, image: ImageRef) -> str:
        request = {"op": "caption", "image": image.digest}
        return self._call(request, lambda: self.inner.caption(image), str)

    def embed_text(self, text: str) -> np.ndarray:
        request = {"op": "embed_text", "text": text}
        return self._call(
            request,
            lambda: [float(x) for x in self.inner.embed_text(text)],
            lambda data: np.asarray(data, dtype=float),
        )

    def embed_image(self, image: ImageRef) -> np.ndarray:
        request = {"op": "embed_image", "image": image.digest}
        return self._call(
            request,
            lambda: [float(x) for x in self.inner.embed_image(image)],
            lambda data: np.asarray(data, dtype=float),
        )

    def detect(self, image: ImageRef) -> list[Detection]:
        request = {"op": "detect", "image": image.digest}
        return self._call(
            request, lambda: _encode_detections(self.inner.detect(image)), _decode_detections
        )

    def chat(self, image: ImageRef, turns: list[str]) -> str:
        request = {"op": "chat", "image": image.digest, "turns": list(turns)}
        return self._call(request, lambda: self.inner.chat(image, turns), str)

    def generate(self, prompt: str, seed: int, n: int) -> list[ImageRef]:
        request = {"op": "generate", "prompt": prompt, "seed": seed, "n": n}
        return self._call(
            request,
            lambda: [r.to_dict() for r in self.inner.generate(prompt, seed, n)],
            lambda data: [ImageRef.from_dict(d) for d in data],
        )


def recording_backend_set(inner: BackendSet, cache: ReplayCache) -> BackendSet:
    """Wrap every present backend so responses are recorded to the cache."""

    def wrap(role, backend):
        return None if backend is None else CachedBackend(role, cache, inner=backend)

    return BackendSet(
        vqa=wrap("vqa", inner.vqa),
        captioner=wrap("captioner", inner.captioner),
        embedder=wrap("embedder", inner.embedder),
        detector=wrap("detector", inner.detector),
        chat=wrap("mllm_chat", inner.chat),
        generator=wrap("generator", inner.generator),
    )


def replay_backend_set(cache: ReplayCache) -> BackendSet:
    """Strict replay backends for every role present in the cache."""
    by_role = cache.roles_and_models()
    kwargs = {}
    field_by_role = {
        "vqa": "vqa",
        "captioner": "captioner",
        "embedder": "embedder",
        "detector": "detector",
        "mllm_chat": "chat",
        "generator": "generator",
    }
    for role, models in by_role.items():
        if len(models) > 1:
            raise BackendError(f"cache holds multiple models for role {role}: {sorted(models)}")
        kwargs[field_by_role[role]] = CachedBackend(role, cache, model_id=next(iter(models)))
    return BackendSet(**kwargs)
