"""Reward-driven sample selection and the reward-weighted denoising loss.

Generate k images per prompt, score each with the category's reward metric,
keep samples whose reward strictly exceeds the category threshold, and emit a
fine-tuning manifest an external trainer can consume. The loss itself
(reward times squared denoising residual) is verified here on a toy denoiser;
no diffusion training happens in this package.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .backends.base import BackendSet, ImageRef
from .metrics.engine import ImageIndex, evaluate_suite
from .metrics.types import MetricConfig
from .suite.types import CATEGORIES, PromptRecord


class GorsError(ValueError):
    """Invalid selection configuration or manifest input."""


DEFAULT_REWARD_METRICS = {
    "color": "b_vqa",
    "shape": "b_vqa",
    "texture": "b_vqa",
    "spatial": "unidet",
    "non_spatial": "clip",
    "complex": "three_in_one",
}

# Fine-tuning recipe carried verbatim into every manifest.
OPTIMIZER_HYPERPARAMETERS = {
    "optimizer": "AdamW",
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "weight_decay": 0.01,
    "batch_size": 5,
}
ADAPTATION_TARGETS = {
    "method": "low_rank_adapters",
    "targets": ["text_encoder.self_attention", "denoiser.attention"],
}


@dataclass(frozen=True)
class Sample:
    prompt_id: str
    category: str
    image: ImageRef
    reward: float
    reward_metric: str

    def __post_init__(self):
        if not 0.0 <= self.reward <= 1.0:
            raise GorsError(f"reward out of [0,1]: {self.reward}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "category": self.category,
            "image": self.image.to_dict(),
            "image_digest": self.image.digest,
            "reward": self.reward,
            "reward_metric": self.reward_metric,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Sample":
        return cls(
            prompt_id=data["prompt_id"],
            category=data["category"],
            image=ImageRef.from_dict(data["image"]),
            reward=data["reward"],
            reward_metric=data["reward_metric"],
        )


@dataclass
class SelectionConfig:
    k_per_prompt: int = 10
    thresholds: dict[str, float] = field(
        default_factory=lambda: {c: 0.5 for c in CATEGORIES}
    )
    reward_metrics: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_REWARD_METRICS)
    )
    seed: int = 0

    def __post_init__(self):
        if self.k_per_prompt < 1:
            raise GorsError("k_per_prompt must be >= 1")
        for category, value in self.thresholds.items():
            if not 0.0 <= value <= 1.0:
                raise GorsError(f"threshold for {category} out of [0,1]: {value}")

    def threshold_for(self, category: str) -> float:
        if category not in self.thresholds:
            raise GorsError(f"no threshold configured for category {category!r}")
        return self.thresholds[category]

    def with_halved_thresholds(self) -> "SelectionConfig":
        return replace(self, thresholds={c: t / 2 for c, t in self.thresholds.items()})

    def with_zero_thresholds(self) -> "SelectionConfig":
        return replace(self, thresholds={c: 0.0 for c in self.thresholds})


def median_thresholds(samples: Sequence[Sample]) -> dict[str, float]:
    """Per-category median reward, the documented threshold default."""
    by_category: dict[str, list[float]] = {}
    for sample in samples:
        by_category.setdefault(sample.category, []).append(sample.reward)
    return {
        category: float(np.median(rewards)) for category, rewards in by_category.items()
    }


def generate_and_score(
    records: Sequence[PromptRecord],
    backends: BackendSet,
    cfg: SelectionConfig,
    metric_cfg: Optional[MetricConfig] = None,
) -> tuple[list[Sample], ImageIndex, list[dict[str, str]]]:
    """k images per prompt, each scored with its category's reward metric.

    Returns (samples, image index, failures). A prompt whose generation or
    scoring fails is recorded in failures and skipped.
    """
    if backends.generator is None:
        raise GorsError("generate_and_score needs a generator backend")
    failures: list[dict[str, str]] = []
    index = ImageIndex()
    usable: list[PromptRecord] = []
    for record in records:
        try:
            refs = backends.generator.generate(record.text, cfg.seed, cfg.k_per_prompt)
        except Exception as err:  # noqa: BLE001 - generation failures are data, not bugs
            failures.append({"prompt_id": record.id, "stage": "generate", "error": str(err)})
            continue
        index.add(record.id, refs)
        usable.append(record)

    samples: list[Sample] = []
    by_metric: dict[str, list[PromptRecord]] = {}
    for record in usable:
        metric = cfg.reward_metrics.get(record.category)
        if metric is None:
            failures.append({"prompt_id": record.id, "stage": "score",
                             "error": f"no reward metric for category {record.category!r}"})
            continue
        by_metric.setdefault(metric, []).append(record)

    for metric, metric_records in by_metric.items():
        result = evaluate_suite(metric_records, index, [metric], backends, cfg=metric_cfg)
        scored = {(s.prompt_id, s.image_id): s.value for s in result.scores}
        inapplicable = {(e["prompt_id"], e["image_id"]) for e in result.inapplicable}
        for record in metric_records:
            for ref in index.for_prompt(record.id):
                key = (record.id, ref.id)
                if key in scored:
                    samples.append(
                        Sample(record.id, record.category, ref, scored[key], metric)
                    )
                elif key in inapplicable:
                    failures.append(
                        {"prompt_id": record.id, "stage": "score",
                         "error": f"{metric} inapplicable"}
                    )
    return samples, index, failures


def select(samples: Sequence[Sample], cfg: SelectionConfig) -> list[Sample]:
    """Keep samples with reward strictly above the category threshold, in order."""
    return [s for s in samples if s.reward > cfg.threshold_for(s.category)]


@dataclass
class TrainingManifest:
    samples: list[Sample]
    thresholds: dict[str, float]
    reward_metrics: dict[str, str]
    k_per_prompt: int
    loss: str = "reward_weighted_denoising_mse"
    hyperparameters: dict[str, Any] = field(
        default_factory=lambda: dict(OPTIMIZER_HYPERPARAMETERS)
    )
    adaptation: dict[str, Any] = field(default_factory=lambda: dict(ADAPTATION_TARGETS))

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": [s.to_dict() for s in self.samples],
            "thresholds": self.thresholds,
            "reward_metrics": self.reward_metrics,
            "k_per_prompt": self.k_per_prompt,
            "loss": self.loss,
            "hyperparameters": self.hyperparameters,
            "adaptation": self.adaptation,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainingManifest":
        return cls(
            samples=[Sample.from_dict(s) for s in data["samples"]],
            thresholds=data["thresholds"],
            reward_metrics=data["reward_metrics"],
            k_per_prompt=data["k_per_prompt"],
            loss=data["loss"],
            hyperparameters=data["hyperparameters"],
            adaptation=data["adaptation"],
        )

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TrainingManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_manifest(selected: Sequence[Sample], cfg: SelectionConfig) -> TrainingManifest:
    if not selected:
        raise GorsError("cannot build a training manifest from an empty selection")
    for sample in selected:
        if not sample.reward > cfg.threshold_for(sample.category):
            raise GorsError(
                f"sample {sample.prompt_id}/{sample.image.id} is at or below its threshold"
            )
    return TrainingManifest(
        samples=list(selected),
        thresholds=dict(cfg.thresholds),
        reward_metrics=dict(cfg.reward_metrics),
        k_per_prompt=cfg.k_per_prompt,
    )


@dataclass
class DenoiseBatch:
    """One training sample's denoising tensors plus its reward weight."""

    latents: np.ndarray  # z_t
    timestep: int  # t
    conditioning: str  # y
    noise: np.ndarray  # true noise
    predicted_noise: np.ndarray  # model output
    reward: float  # s

    def __post_init__(self):
        self.latents = np.asarray(self.latents, dtype=float)
        self.noise = np.asarray(self.noise, dtype=float)
        self.predicted_noise = np.asarray(self.predicted_noise, dtype=float)
        if self.noise.shape != self.predicted_noise.shape:
            raise GorsError(
                f"noise shape {self.noise.shape} != prediction shape {self.predicted_noise.shape}"
            )
        if not 0.0 <= self.reward <= 1.0:
            raise GorsError(f"reward out of [0,1]: {self.reward}")


def weighted_denoise_loss(batch: Union[DenoiseBatch, Sequence[DenoiseBatch]]) -> float:
    """s * ||noise - predicted||^2 for one item; mean over a sequence."""
    if isinstance(batch, DenoiseBatch):
        residual = batch.noise - batch.predicted_noise
        return float(batch.reward * np.sum(residual * residual))
    items = list(batch)
    if not items:
        raise GorsError("empty batch")
    return float(sum(weighted_denoise_loss(item) for item in items) / len(items))


class ToyDenoiser:
    """Tiny differentiable predictor for verifying the loss gradient.

    predicted = tanh(W @ (z + c(y))) + b / (1 + t), with c(y) a fixed
    hash-derived conditioning vector. Parameters are W (m x d) and b (m).
    """

    def __init__(self, dim_in: int = 4, dim_out: int = 3, seed: int = 0):
        rng = np.random.RandomState(seed)
        self.dim_in = dim_in
        self.dim_out = dim_out
        self.W = rng.standard_normal((dim_out, dim_in)) * 0.5
        self.b = rng.standard_normal(dim_out) * 0.1

    def conditioning_vector(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        rng = np.random.RandomState(int.from_bytes(digest[:4], "big"))
        return rng.standard_normal(self.dim_in) * 0.3

    def predict(self, latents: np.ndarray, timestep: int, conditioning: str) -> np.ndarray:
        u = latents + self.conditioning_vector(conditioning)
        return np.tanh(self.W @ u) + self.b / (1.0 + timestep)

    def params(self) -> np.ndarray:
        return np.concatenate([self.W.ravel(), self.b])

    def set_params(self, theta: np.ndarray) -> None:
        split = self.dim_out * self.dim_in
        self.W = theta[:split].reshape(self.dim_out, self.dim_in).copy()
        self.b = theta[split:].copy()

    def loss(self, latents, timestep, conditioning, noise, reward) -> float:
        predicted = self.predict(latents, timestep, conditioning)
        batch = DenoiseBatch(latents, timestep, conditioning, noise, predicted, reward)
        return weighted_denoise_loss(batch)

    def loss_and_grad(
        self, latents, timestep, conditioning, noise, reward
    ) -> tuple[float, np.ndarray]:
        """Analytic gradient of the reward-weighted loss w.r.t. (W, b)."""
        u = np.asarray(latents, dtype=float) + self.conditioning_vector(conditioning)
        h = self.W @ u
        tau = 1.0 / (1.0 + timestep)
        predicted = np.tanh(h) + self.b * tau
        residual = np.asarray(noise, dtype=float) - predicted
        value = float(reward * np.sum(residual * residual))
        # d loss / d predicted = -2 s residual
        dpred = -2.0 * reward * residual
        grad_W = np.outer(dpred * (1.0 - np.tanh(h) ** 2), u)
        grad_b = dpred * tau
        return value, np.concatenate([grad_W.ravel(), grad_b])
