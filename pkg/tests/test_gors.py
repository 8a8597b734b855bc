"""Selection, loss, and gradient tests for reward-driven fine-tuning prep."""

import math
import random

import numpy as np
import pytest

from compbench.backends import ImageRef, fake_backend_set
from compbench.gors import (
    DenoiseBatch,
    GorsError,
    Sample,
    SelectionConfig,
    ToyDenoiser,
    TrainingManifest,
    build_manifest,
    generate_and_score,
    median_thresholds,
    select,
    weighted_denoise_loss,
)
from compbench.suite import build_suite


def sample(reward, category="color", pid="p1", iid="i1"):
    return Sample(
        prompt_id=pid,
        category=category,
        image=ImageRef(iid, "sha256:" + "0" * 64),
        reward=reward,
        reward_metric="b_vqa",
    )


@pytest.fixture(scope="module")
def prompts():
    suite = build_suite(seed=5, per_category=20)
    picked = []
    for category in ("color", "spatial", "non_spatial", "complex"):
        picked.extend([r for r in suite.records if r.category == category][:3])
    return picked


class TestGenerateAndScore:
    def test_k_samples_per_prompt(self, prompts):
        cfg = SelectionConfig(k_per_prompt=10, seed=1)
        backends = fake_backend_set(seed=2)
        samples, index, failures = generate_and_score(prompts[:3], backends, cfg)
        assert len(samples) == 30
        assert not failures
        for record in prompts[:3]:
            assert len(index.for_prompt(record.id)) == 10

    def test_reward_metric_follows_category(self, prompts):
        cfg = SelectionConfig(k_per_prompt=2, seed=1)
        backends = fake_backend_set(seed=2)
        samples, _, _ = generate_and_score(prompts, backends, cfg)
        expected = {"color": "b_vqa", "spatial": "unidet",
                    "non_spatial": "clip", "complex": "three_in_one"}
        for s in samples:
            assert s.reward_metric == expected[s.category]

    def test_deterministic_rerun(self, prompts):
        cfg = SelectionConfig(k_per_prompt=3, seed=1)
        a, _, _ = generate_and_score(prompts[:4], fake_backend_set(seed=2), cfg)
        b, _, _ = generate_and_score(prompts[:4], fake_backend_set(seed=2), cfg)
        assert [s.to_dict() for s in a] == [s.to_dict() for s in b]

    def test_generation_failure_skips_prompt(self, prompts):
        class ExplodingGenerator:
            descriptor = fake_backend_set().generator.descriptor
            serialized = False

            def generate(self, prompt, seed, n):
                raise RuntimeError("boom")

        backends = fake_backend_set(seed=2)
        backends.generator = ExplodingGenerator()
        cfg = SelectionConfig(k_per_prompt=2, seed=1)
        samples, _, failures = generate_and_score(prompts[:2], backends, cfg)
        assert samples == []
        assert [f["stage"] for f in failures] == ["generate", "generate"]


class TestSelect:
    def test_keeps_only_above_threshold(self):
        cfg = SelectionConfig(thresholds={"color": 0.5})
        kept = select([sample(0.9, iid="a"), sample(0.3, iid="b")], cfg)
        assert [s.reward for s in kept] == [0.9]

    def test_zero_threshold_keeps_strictly_positive(self):
        cfg = SelectionConfig(thresholds={"color": 0.5}).with_zero_thresholds()
        kept = select([sample(0.0, iid="a"), sample(0.01, iid="b"), sample(1.0, iid="c")], cfg)
        assert [s.reward for s in kept] == [0.01, 1.0]

    def test_threshold_one_selects_nothing(self):
        cfg = SelectionConfig(thresholds={"color": 1.0})
        assert select([sample(1.0), sample(0.99)], cfg) == []

    def test_order_preserved(self):
        cfg = SelectionConfig(thresholds={"color": 0.1})
        samples = [sample(0.5, iid=f"i{k}") for k in range(5)]
        assert select(samples, cfg) == samples

    def test_idempotent(self):
        cfg = SelectionConfig(thresholds={"color": 0.4})
        samples = [sample(r, iid=f"i{r}") for r in (0.2, 0.5, 0.9)]
        once = select(samples, cfg)
        assert select(once, cfg) == once

    def test_selection_soundness_and_monotonicity_random(self):
        rng = random.Random(17)
        for _ in range(1000):
            samples = [
                sample(rng.random(), iid=f"i{k}") for k in range(rng.randrange(1, 20))
            ]
            t1 = rng.random()
            t2 = min(1.0, t1 + rng.random() * (1 - t1))
            low = select(samples, SelectionConfig(thresholds={"color": t1}))
            high = select(samples, SelectionConfig(thresholds={"color": t2}))
            assert all(s.reward > t1 for s in low)
            assert len(high) <= len(low)

    def test_halved_thresholds(self):
        cfg = SelectionConfig(thresholds={"color": 0.8, "spatial": 0.4})
        halved = cfg.with_halved_thresholds()
        assert halved.thresholds == {"color": 0.4, "spatial": 0.2}

    def test_median_thresholds(self):
        samples = [sample(r, iid=f"i{r}") for r in (0.1, 0.5, 0.9)]
        assert median_thresholds(samples) == {"color": 0.5}


class TestWeightedDenoiseLoss:
    def test_zero_reward_kills_loss(self):
        batch = DenoiseBatch(
            latents=np.zeros(3), timestep=10, conditioning="y",
            noise=np.array([1.0, 2.0, 3.0]), predicted_noise=np.zeros(3), reward=0.0,
        )
        assert weighted_denoise_loss(batch) == 0.0

    def test_zero_residual_kills_loss(self):
        noise = np.array([0.3, -0.7])
        batch = DenoiseBatch(np.zeros(2), 5, "y", noise, noise.copy(), reward=0.9)
        assert weighted_denoise_loss(batch) == 0.0

    def test_half_reward_of_point_four_residual(self):
        # ||residual||^2 == 0.4 exactly: single component sqrt(0.4)
        d = math.sqrt(0.4)
        batch = DenoiseBatch(
            np.zeros(1), 0, "y", np.array([d]), np.zeros(1), reward=0.5
        )
        assert weighted_denoise_loss(batch) == 0.2

    def test_linear_in_reward(self):
        rng = np.random.RandomState(3)
        noise = rng.standard_normal(6)
        predicted = rng.standard_normal(6)
        for s in (0.1, 0.25, 0.5):
            a = weighted_denoise_loss(DenoiseBatch(np.zeros(6), 1, "y", noise, predicted, s))
            b = weighted_denoise_loss(DenoiseBatch(np.zeros(6), 1, "y", noise, predicted, 2 * s))
            assert b == pytest.approx(2 * a, abs=1e-12)

    def test_batch_mean(self):
        items = [
            DenoiseBatch(np.zeros(1), 0, "y", np.array([1.0]), np.zeros(1), reward=1.0),
            DenoiseBatch(np.zeros(1), 0, "y", np.array([1.0]), np.zeros(1), reward=0.5),
        ]
        assert weighted_denoise_loss(items) == pytest.approx(0.75)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(GorsError):
            DenoiseBatch(np.zeros(2), 0, "y", np.zeros(2), np.zeros(3), reward=0.5)


class TestToyDenoiserGradient:
    def test_analytic_gradient_matches_central_differences(self):
        model = ToyDenoiser(dim_in=4, dim_out=3, seed=1)
        rng = np.random.RandomState(2)
        latents = rng.standard_normal(4)
        noise = rng.standard_normal(3)
        value, grad = model.loss_and_grad(latents, 7, "a red car", noise, reward=0.8)
        assert value == pytest.approx(model.loss(latents, 7, "a red car", noise, 0.8))

        theta = model.params()
        eps = 1e-6
        for i in range(len(theta)):
            probe = ToyDenoiser(dim_in=4, dim_out=3, seed=1)
            up = theta.copy()
            up[i] += eps
            probe.set_params(up)
            f_up = probe.loss(latents, 7, "a red car", noise, 0.8)
            down = theta.copy()
            down[i] -= eps
            probe.set_params(down)
            f_down = probe.loss(latents, 7, "a red car", noise, 0.8)
            fd = (f_up - f_down) / (2 * eps)
            denom = max(abs(fd), abs(grad[i]), 1e-8)
            assert abs(grad[i] - fd) / denom < 1e-4, f"param {i}"

    def test_gradient_scales_linearly_with_reward(self):
        model = ToyDenoiser(seed=3)
        rng = np.random.RandomState(4)
        latents = rng.standard_normal(4)
        noise = rng.standard_normal(3)
        _, g1 = model.loss_and_grad(latents, 3, "y", noise, reward=0.25)
        _, g2 = model.loss_and_grad(latents, 3, "y", noise, reward=0.5)
        np.testing.assert_allclose(g2, 2 * g1, rtol=1e-12)


class TestManifest:
    def test_two_selected_samples(self):
        cfg = SelectionConfig(thresholds={"color": 0.5})
        selected = [sample(0.9, iid="a"), sample(0.8, iid="b")]
        manifest = build_manifest(selected, cfg)
        assert len(manifest.samples) == 2
        assert manifest.hyperparameters["batch_size"] == 5
        assert manifest.hyperparameters["optimizer"] == "AdamW"
        assert manifest.hyperparameters["beta1"] == 0.9
        assert manifest.hyperparameters["weight_decay"] == 0.01

    def test_halved_threshold_recorded(self):
        cfg = SelectionConfig(thresholds={"color": 0.8}).with_halved_thresholds()
        manifest = build_manifest([sample(0.9)], cfg)
        assert manifest.thresholds == {"color": 0.4}

    def test_round_trip(self, tmp_path):
        cfg = SelectionConfig(thresholds={"color": 0.5})
        manifest = build_manifest([sample(0.9, iid="a"), sample(0.7, iid="b")], cfg)
        path = tmp_path / "manifest.json"
        manifest.save(path)
        loaded = TrainingManifest.load(path)
        assert loaded.to_dict() == manifest.to_dict()

    def test_empty_selection_rejected(self):
        with pytest.raises(GorsError):
            build_manifest([], SelectionConfig())

    def test_below_threshold_sample_rejected(self):
        cfg = SelectionConfig(thresholds={"color": 0.95})
        with pytest.raises(GorsError):
            build_manifest([sample(0.9)], cfg)

    def test_adaptation_targets_present(self):
        manifest = build_manifest([sample(0.9)], SelectionConfig(thresholds={"color": 0.5}))
        assert "text_encoder.self_attention" in manifest.adaptation["targets"]
        assert "denoiser.attention" in manifest.adaptation["targets"]
