"""Tests for label distributions, image descriptors and the global estimators."""

import math
from itertools import pairwise
from pathlib import Path

import numpy as np
import pytest
from assertpy import assert_that

from curda.labeldist import (
    DESCRIPTOR_SIZE,
    EstimatorKind,
    LREstimator,
    build_estimator,
    chi2_distance,
    dist_cross_entropy,
    estimate_lr,
    estimate_nn,
    estimate_source_mean,
    estimate_uniform,
    fit_lr_estimator,
    gt_label_distribution,
    image_descriptor,
    image_descriptors,
    one_hot_distribution,
    predicted_label_distribution,
)
from curda.rng import SplitMix64
from curda.scenegen import Benchmark, DomainParams, generate_scene


def close(actual: np.ndarray, expected: list[float], tolerance: float = 1e-6) -> bool:
    return bool(np.allclose(actual, np.asarray(expected), atol=tolerance, rtol=0.0))


class TestDistributions:
    """Tests for ground-truth and predicted label distributions."""

    def test_gt_counts(self) -> None:
        """A 2x2 mask [0, 0, 1, 2] gives (0.5, 0.25, 0.25)."""
        mask = np.array([[0, 0], [1, 2]], dtype=np.int64)
        assert_that(close(gt_label_distribution(mask, 3), [0.5, 0.25, 0.25])).is_true()

    def test_gt_rejects_bad_ids(self) -> None:
        """Class ids must be below C."""
        with pytest.raises(ValueError, match="outside"):
            gt_label_distribution(np.array([[3]], dtype=np.int64), 3)

    def test_uniform_prediction(self) -> None:
        """A uniform prediction stays uniform for any K."""
        pred = np.full((3, 4, 5), 0.2)
        for k in (1.0, 6.0, 20.0):
            assert_that(close(predicted_label_distribution(pred, k), [0.2] * 5)).is_true()

    def test_sharpening_one_pixel(self) -> None:
        """(0.7, 0.3) with K=6 normalizes (1, (3/7)^6)."""
        pred = np.array([[[0.7, 0.3]]])
        assert_that(close(predicted_label_distribution(pred, 6.0), [0.993842, 0.006158])).is_true()

    def test_large_k_approaches_argmax_histogram(self) -> None:
        """K=50 is within 1e-4 of the histogram of arg-max labels."""
        argmax = SplitMix64(4).integers(0, 4, 36).reshape(6, 6)
        pred = np.full((6, 6, 4), 0.1)
        np.put_along_axis(pred, argmax[..., None], 0.7, axis=-1)
        distance = np.abs(predicted_label_distribution(pred, 50.0) - gt_label_distribution(argmax, 4)).sum()
        assert_that(float(distance)).is_less_than(1e-4)

    def test_sharpening_favors_the_winning_class(self) -> None:
        """Raising K never lowers the mass of the class that wins every pixel."""
        for seed in range(20):
            winner = seed % 4
            scores = SplitMix64(seed).uniform(5 * 5 * 4).reshape(5, 5, 4)
            scores[..., winner] += 1.0
            pred = scores / scores.sum(axis=-1, keepdims=True)
            masses = [float(predicted_label_distribution(pred, k)[winner]) for k in (1.0, 2.0, 6.0, 20.0, 50.0)]
            assert_that(all(b >= a - 1e-12 for a, b in pairwise(masses))).described_as(str(masses)).is_true()

    def test_one_hot_prediction_matches_gt(self) -> None:
        """One-hot predictions give the ground-truth distribution for every K."""
        mask = np.array([[0, 1, 1], [2, 2, 2]], dtype=np.int64)
        pred = np.eye(3)[mask]
        for k in (1.0, 3.0, 10.0):
            assert_that(close(predicted_label_distribution(pred, k), gt_label_distribution(mask, 3).tolist())).is_true()

    def test_region(self) -> None:
        """A region restricts the pixels that are pooled."""
        pred = np.eye(2)[np.array([[0, 1], [1, 1]])]
        assert_that(close(predicted_label_distribution(pred, 6.0, np.array([0])), [1.0, 0.0])).is_true()
        with pytest.raises(ValueError, match="at least one pixel"):
            predicted_label_distribution(pred, 6.0, np.array([], dtype=np.int64))

    def test_k_below_one(self) -> None:
        """K must be at least 1."""
        with pytest.raises(ValueError, match="K must be"):
            predicted_label_distribution(np.full((1, 1, 2), 0.5), 0.5)


class TestDistances:
    """Tests for the cross-entropy and chi-squared distances."""

    def test_cross_entropy(self) -> None:
        """Hand-evaluated cross-entropies."""
        assert_that(dist_cross_entropy(np.array([0.5, 0.5]), np.array([0.5, 0.5]))).is_close_to(math.log(2), 1e-6)
        assert_that(dist_cross_entropy(np.array([1.0, 0.0]), np.array([0.9, 0.1]))).is_close_to(0.105361, 1e-6)
        assert_that(dist_cross_entropy(np.array([0.5, 0.5]), np.array([0.9, 0.1]))).is_close_to(1.203973, 1e-6)

    def test_chi2(self) -> None:
        """Hand-evaluated chi-squared distances."""
        p = np.array([0.5, 0.5])
        assert_that(chi2_distance(p, p)).is_equal_to(0.0)
        assert_that(chi2_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0]))).is_close_to(2.0, 1e-12)
        assert_that(chi2_distance(p, np.array([0.25, 0.75]))).is_close_to(0.133333, 1e-6)

    def test_chi2_is_symmetric(self) -> None:
        """chi2(p, q) equals chi2(q, p)."""
        p, q = np.array([0.2, 0.0, 0.8]), np.array([0.1, 0.6, 0.3])
        assert_that(chi2_distance(p, q)).is_close_to(chi2_distance(q, p), 1e-15)

    def test_one_hot(self) -> None:
        """A one-hot distribution puts all mass on one class."""
        assert_that(one_hot_distribution(2, 4).tolist()).is_equal_to([0.0, 0.0, 1.0, 0.0])


class TestDescriptors:
    """Tests for the global image descriptor."""

    def test_constant_gray(self) -> None:
        """A mid-gray image fills bin 4 of every histogram and pools to 0.5."""
        descriptor = image_descriptor(np.full((16, 16, 3), 0.5))
        assert_that(descriptor.shape).is_equal_to((DESCRIPTOR_SIZE,))
        for channel in range(3):
            block = descriptor[channel * 8 : (channel + 1) * 8]
            assert_that(block.tolist()).is_equal_to([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
        assert_that(bool(np.allclose(descriptor[24:], 0.5))).is_true()

    def test_tint_only_changes_red_histogram(self) -> None:
        """Halving red changes the red block and keeps green and blue."""
        neutral = image_descriptor(generate_scene(5, 0, DomainParams(noise_sigma=0.0), 32, 32).image)
        tinted = image_descriptor(generate_scene(5, 0, DomainParams(tint=(0.5, 1.0, 1.0), noise_sigma=0.0), 32, 32).image)
        assert_that(neutral[:8].tolist()).is_not_equal_to(tinted[:8].tolist())
        assert_that(neutral[8:24].tolist()).is_equal_to(tinted[8:24].tolist())


class TestEstimators:
    """Tests for the global label-distribution estimators."""

    def test_lr_with_zero_weights_is_uniform(self) -> None:
        """Zero weights and bias predict the uniform distribution."""
        estimator = LREstimator.unscaled(np.zeros((DESCRIPTOR_SIZE, 4)), np.zeros(4))
        assert_that(close(estimate_lr(estimator, np.full((16, 16, 3), 0.3)), [0.25] * 4)).is_true()

    def test_lr_learns_constant_target(self) -> None:
        """Identical targets are reproduced for every input."""
        rng = SplitMix64(1)
        descriptors = rng.uniform(20 * 5).reshape(20, 5)
        target = np.array([0.6, 0.3, 0.1])
        estimator = fit_lr_estimator(descriptors, np.tile(target, (20, 1)), epochs=2000, lr_rate=0.5)
        probs = estimator.predict(descriptors)
        assert_that(float(np.abs(probs - target).sum(axis=1).max())).is_less_than(0.02)

    def test_lr_ignores_descriptor_scale(self) -> None:
        """Rescaling one descriptor dimension leaves the fitted predictions unchanged."""
        rng = SplitMix64(6)
        descriptors = rng.uniform(30 * 4).reshape(30, 4)
        targets = np.eye(3)[(descriptors[:, 0] * 3).astype(np.int64).clip(0, 2)] * 0.8 + 0.2 / 3
        scaled = descriptors * np.array([100.0, 1.0, 0.01, 1.0])
        plain = fit_lr_estimator(descriptors, targets, epochs=300)
        rescaled = fit_lr_estimator(scaled, targets, epochs=300)
        assert_that(bool(np.allclose(plain.predict(descriptors), rescaled.predict(scaled), atol=1e-9))).is_true()
        assert_that(rescaled.std[0]).is_close_to(100.0 * plain.std[0], 1e-9)

    def test_lr_separates_soft_targets(self) -> None:
        """On separable descriptors the fit beats the mean distribution."""
        rng = SplitMix64(8)
        descriptors = rng.uniform(40 * 3).reshape(40, 3)
        targets = np.eye(2)[(descriptors[:, 1] > 0.5).astype(np.int64)] * 0.9 + 0.05
        estimator = fit_lr_estimator(descriptors, targets)
        fitted = np.abs(estimator.predict(descriptors) - targets).sum(axis=1).mean()
        baseline = np.abs(targets.mean(axis=0) - targets).sum(axis=1).mean()
        assert_that(float(fitted)).is_less_than(0.5 * float(baseline))

    def test_lr_loss_decreases(self) -> None:
        """Gradient descent lowers the objective."""
        rng = SplitMix64(2)
        descriptors = rng.uniform(10 * 3).reshape(10, 3)
        targets = np.eye(2)[(descriptors[:, 0] > 0.5).astype(np.int64)]
        trace: list[float] = []
        fit_lr_estimator(descriptors, targets, epochs=50, lr_rate=0.5, loss_trace=trace)
        assert_that(trace).is_length(50)
        assert_that(trace[-1]).is_less_than(trace[0])

    def test_lr_save_and_load(self, tmp_path: Path) -> None:
        """A saved estimator loads back unchanged."""
        descriptors = SplitMix64(3).uniform(12 * DESCRIPTOR_SIZE).reshape(12, DESCRIPTOR_SIZE)
        estimator = fit_lr_estimator(descriptors, np.eye(2)[np.arange(12) % 2], epochs=20)
        loaded = LREstimator.load(estimator.save(tmp_path / "lr.cda"))
        assert_that(loaded.weights.tobytes()).is_equal_to(estimator.weights.tobytes())
        assert_that(loaded.mean.tobytes()).is_equal_to(estimator.mean.tobytes())
        assert_that(loaded.std.tobytes()).is_equal_to(estimator.std.tobytes())
        assert_that(loaded.num_classes).is_equal_to(2)

    def test_nn_picks_two_nearest(self) -> None:
        """Sources at distances 1, 2 and 3 with k=2 average the first two."""
        descriptors = np.array([[1.0], [2.0], [3.0]])
        dists = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        assert_that(close(estimate_nn(descriptors, dists, np.array([0.0]), k=2), [0.5, 0.5])).is_true()

    def test_nn_exact_match(self) -> None:
        """k=1 on a source descriptor returns that source's distribution."""
        descriptors = np.array([[0.0, 1.0], [4.0, 4.0]])
        dists = np.array([[0.2, 0.8], [0.9, 0.1]])
        assert_that(close(estimate_nn(descriptors, dists, np.array([4.0, 4.0]), k=1), [0.9, 0.1])).is_true()

    def test_nn_all_sources_is_mean(self) -> None:
        """k equal to the source count gives the source mean."""
        descriptors = np.array([[0.0], [1.0], [5.0]])
        dists = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        result = estimate_nn(descriptors, dists, np.array([2.0]), k=3)
        assert_that(close(result, estimate_source_mean(dists).tolist())).is_true()

    def test_nn_errors(self) -> None:
        """Empty sources and out-of-range k are refused."""
        with pytest.raises(ValueError, match="at least one source"):
            estimate_nn(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(2))
        with pytest.raises(ValueError, match="k must lie"):
            estimate_nn(np.zeros((2, 1)), np.eye(2), np.zeros(1), k=3)

    def test_source_mean(self) -> None:
        """The mean of (1, 0) and (0, 1) is (0.5, 0.5); empty input is an error."""
        assert_that(close(estimate_source_mean(np.array([[1.0, 0.0], [0.0, 1.0]])), [0.5, 0.5])).is_true()
        with pytest.raises(ValueError, match="at least one"):
            estimate_source_mean(np.zeros((0, 2)))

    def test_uniform(self) -> None:
        """Uniform over C classes."""
        assert_that(estimate_uniform(8).tolist()).is_equal_to([0.125] * 8)
        with pytest.raises(ValueError):
            estimate_uniform(0)

    def test_build_every_kind(self, tiny_benchmark: Benchmark) -> None:
        """Every estimator kind returns valid distributions on target images."""
        source = tiny_benchmark.source_train
        descriptors = image_descriptors(source.images)
        dists = np.stack([gt_label_distribution(mask, source.num_classes) for mask in source.masks])
        for kind in EstimatorKind:
            estimator = build_estimator(kind, descriptors, dists, lr_epochs=20)
            estimate = estimator.estimate(tiny_benchmark.target_val.images[0])
            assert_that(estimator.name).is_equal_to(kind.value)
            assert_that(float(estimate.sum())).is_close_to(1.0, 1e-9)
            assert_that(float(estimate.min())).is_greater_than_or_equal_to(0.0)

    def test_build_rejects_wrong_descriptors(self) -> None:
        """Descriptors of the wrong width are refused."""
        with pytest.raises(ValueError, match="descriptors"):
            build_estimator("mean", np.zeros((2, 5)), np.full((2, 8), 0.125))
