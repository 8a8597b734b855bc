"""Pluggable model backends: contracts, deterministic fakes, record/replay."""

from .base import (
    BACKEND_ROLES,
    BackendDescriptor,
    BackendError,
    BackendSet,
    ImageRef,
    canonical_payload,
    request_digest,
)
from .fakes import (
    FakeCaptioner,
    FakeChat,
    FakeDetector,
    FakeEmbedder,
    FakeGenerator,
    FakeVqa,
    fake_backend_set,
)
from .replay import CachedBackend, ReplayCache, recording_backend_set, replay_backend_set

__all__ = [
    "BACKEND_ROLES",
    "BackendDescriptor",
    "BackendError",
    "BackendSet",
    "CachedBackend",
    "FakeCaptioner",
    "FakeChat",
    "FakeDetector",
    "FakeEmbedder",
    "FakeGenerator",
    "FakeVqa",
    "ImageRef",
    "ReplayCache",
    "canonical_payload",
    "fake_backend_set",
    "recording_backend_set",
    "replay_backend_set",
    "request_digest",
]
