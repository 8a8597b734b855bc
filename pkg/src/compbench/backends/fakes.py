"""Deterministic fake backends.

Fakes answer from explicit overrides first, and otherwise derive a stable
pseudo-random response from a hash of (seed, request), so distinct requests
get independent values and repeated requests get identical ones. The fake
generator can optionally write small real PNG files so downstream consumers
that serve image bytes (the annotation service) work end to end.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..geometry import BBox, Detection
from .base import BackendDescriptor, ImageRef


def _hash_unit(seed: int, *parts: str) -> float:
    """Deterministic value in [0, 1) from the seed and request parts."""
    h = hashlib.sha256(("|".join((str(seed),) + parts)).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big") / 2**64


def _hash_int(seed: int, *parts: str) -> int:
    h = hashlib.sha256(("|".join((str(seed),) + parts)).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


@dataclass
class FakeVqa:
    seed: int = 0
    overrides: dict[tuple[str, str], float] = field(default_factory=dict)
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("vqa", "fake", "fake-vqa-1")
    )
    calls: int = 0

    def vqa_yes_probability(self, image: ImageRef, question: str) -> float:
        if not question:
            raise ValueError("question must be non-empty")
        self.calls += 1
        key = (image.id, question)
        if key in self.overrides:
            return self.overrides[key]
        return _hash_unit(self.seed, "vqa", image.digest, question)


@dataclass
class FakeCaptioner:
    seed: int = 0
    overrides: dict[str, str] = field(default_factory=dict)
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("captioner", "fake", "fake-caption-1")
    )
    calls: int = 0

    def caption(self, image: ImageRef) -> str:
        self.calls += 1
        if image.id in self.overrides:
            return self.overrides[image.id]
        return f"a synthetic scene {_hash_int(self.seed, 'caption', image.digest) % 10_000}"


@dataclass
class FakeEmbedder:
    seed: int = 0
    dim: int = 32
    text_overrides: dict[str, np.ndarray] = field(default_factory=dict)
    image_overrides: dict[str, np.ndarray] = field(default_factory=dict)
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("embedder", "fake", "fake-embed-1")
    )
    calls: int = 0

    def _vector(self, *parts: str) -> np.ndarray:
        rng = np.random.RandomState(_hash_int(self.seed, *parts) % 2**32)
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    @staticmethod
    def _unit(v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) / np.linalg.norm(v)

    def embed_text(self, text: str) -> np.ndarray:
        self.calls += 1
        if text in self.text_overrides:
            return self._unit(self.text_overrides[text])
        return self._vector("text", text)

    def embed_image(self, image: ImageRef) -> np.ndarray:
        self.calls += 1
        if image.id in self.image_overrides:
            return self._unit(self.image_overrides[image.id])
        return self._vector("image", image.digest)


@dataclass
class FakeDetector:
    seed: int = 0
    overrides: dict[str, list[Detection]] = field(default_factory=dict)
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("detector", "fake", "fake-detect-1")
    )
    calls: int = 0

    def detect(self, image: ImageRef) -> list[Detection]:
        self.calls += 1
        return list(self.overrides.get(image.id, []))


DEFAULT_CHAT_TEMPLATE = '{{"score": {score}, "explanation": "synthetic response"}}'


@dataclass
class FakeChat:
    seed: int = 0
    overrides: dict[tuple[str, tuple[str, ...]], str] = field(default_factory=dict)
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("mllm_chat", "fake", "fake-chat-1")
    )
    calls: int = 0

    def chat(self, image: ImageRef, turns: list[str]) -> str:
        self.calls += 1
        key = (image.id, tuple(turns))
        if key in self.overrides:
            return self.overrides[key]
        score = _hash_int(self.seed, "chat", image.digest, *turns) % 101
        return DEFAULT_CHAT_TEMPLATE.format(score=score)


def _png_bytes(image_id: str, width: int, height: int, seed: int) -> bytes:
    from PIL import Image

    rng = np.random.RandomState(_hash_int(seed, "pixels", image_id) % 2**32)
    pixels = rng.randint(0, 256, size=(height, width, 3), dtype=np.uint8)
    img = Image.fromarray(pixels, mode="RGB")
    import io

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


@dataclass
class FakeGenerator:
    """Deterministic per (prompt, seed, index); writes PNGs when out_dir is set."""

    seed: int = 0
    width: int = 512
    height: int = 512
    out_dir: Optional[Path] = None
    image_size: int = 24  # written PNGs are tiny; width/height describe the nominal image
    serialized: bool = False
    descriptor: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("generator", "fake", "fake-generate-1")
    )
    calls: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def generate(self, prompt: str, seed: int, n: int) -> list[ImageRef]:
        with self._lock:
            self.calls += 1
        refs = []
        for index in range(n):
            token = hashlib.sha256(
                f"{self.seed}|{prompt}|{seed}|{index}".encode("utf-8")
            ).hexdigest()[:16]
            image_id = f"gen_{token}"
            if self.out_dir is not None:
                path = Path(self.out_dir) / f"{image_id}.png"
                if not path.exists():
                    path.parent.mkdir(parents=True, exist_ok=True)
                    path.write_bytes(
                        _png_bytes(image_id, self.image_size, self.image_size, self.seed)
                    )
                locator = str(path)
            else:
                locator = "sha256:" + hashlib.sha256(image_id.encode("utf-8")).hexdigest()
            refs.append(ImageRef(image_id, locator, self.width, self.height))
        return refs


def fake_backend_set(seed: int = 0, out_dir: Optional[Path] = None):
    from .base import BackendSet

    return BackendSet(
        vqa=FakeVqa(seed=seed),
        captioner=FakeCaptioner(seed=seed),
        embedder=FakeEmbedder(seed=seed),
        detector=FakeDetector(seed=seed),
        chat=FakeChat(seed=seed),
        generator=FakeGenerator(seed=seed, out_dir=out_dir),
    )
