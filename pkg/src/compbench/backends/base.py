"""Backend contracts for every pretrained model the metrics call.

The metric engine only ever sees these interfaces; real model adapters,
deterministic fakes, and replay wrappers are interchangeable behind them.
Adapters that cannot handle concurrent calls set `serialized = True` and the
engine funnels their requests through a single lane.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Protocol, runtime_checkable

import numpy as np

BACKEND_ROLES = ("vqa", "captioner", "embedder", "detector", "mllm_chat", "generator")


class BackendError(RuntimeError):
    """Transport or protocol failure talking to a backend."""


@dataclass(frozen=True)
class ImageRef:
    """A generated image: identity plus a content locator.

    The locator is a file path or a `sha256:` digest; `digest` is stable for
    identical bytes, falling back to the id for byte-less fakes.
    """

    id: str
    locator: str
    width: int = 512
    height: int = 512

    @property
    def digest(self) -> str:
        if self.locator.startswith("sha256:"):
            return self.locator[len("sha256:"):]
        path = Path(self.locator)
        if path.is_file():
            return hashlib.sha256(path.read_bytes()).hexdigest()
        return hashlib.sha256(self.id.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "locator": self.locator, "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ImageRef":
        return cls(data["id"], data["locator"], data.get("width", 512), data.get("height", 512))


@dataclass(frozen=True)
class BackendDescriptor:
    role: str
    implementation: str
    model_id: str

    def __post_init__(self):
        if self.role not in BACKEND_ROLES:
            raise ValueError(f"unknown backend role: {self.role!r}")

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role, "implementation": self.implementation, "model_id": self.model_id}


def canonical_payload(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def request_digest(role: str, model_id: str, payload: Any) -> str:
    body = canonical_payload({"role": role, "model": model_id, "request": payload})
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@runtime_checkable
class VqaBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def vqa_yes_probability(self, image: ImageRef, question: str) -> float: ...


@runtime_checkable
class CaptionBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def caption(self, image: ImageRef) -> str: ...


@runtime_checkable
class EmbedBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def embed_text(self, text: str) -> np.ndarray: ...
    def embed_image(self, image: ImageRef) -> np.ndarray: ...


@runtime_checkable
class DetectBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def detect(self, image: ImageRef) -> list: ...


@runtime_checkable
class ChatBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def chat(self, image: ImageRef, turns: list[str]) -> str: ...


@runtime_checkable
class GenerateBackend(Protocol):
    descriptor: BackendDescriptor
    serialized: bool

    def generate(self, prompt: str, seed: int, n: int) -> list[ImageRef]: ...


@dataclass
class BackendSet:
    """The full complement of backends one evaluation run uses."""

    vqa: Optional[VqaBackend] = None
    captioner: Optional[CaptionBackend] = None
    embedder: Optional[EmbedBackend] = None
    detector: Optional[DetectBackend] = None
    chat: Optional[ChatBackend] = None
    generator: Optional[GenerateBackend] = None

    def descriptors(self) -> list[BackendDescriptor]:
        out = []
        for backend in (self.vqa, self.captioner, self.embedder, self.detector,
                        self.chat, self.generator):
            if backend is not None:
                out.append(backend.descriptor)
        return out
