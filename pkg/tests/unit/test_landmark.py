"""Tests for the superpixel SVM, landmark selection and landmark diagnostics."""

import math
from pathlib import Path

import numpy as np
import pytest
from assertpy import assert_that

from curda.landmark import (
    LandmarkSet,
    ScoredImage,
    SuperpixelSettings,
    SVMModel,
    build_landmarks,
    classify_many,
    classify_sp,
    decile_accuracy,
    decision_values,
    landmark_count,
    landmark_diagnostics,
    select_landmarks,
    superpixel_segmentation,
    top_fraction_curve,
    train_sp_svm,
)
from curda.landmark.svm import classify_decisions
from curda.numerics import IGNORE_INDEX
from curda.rng import SplitMix64
from curda.scenegen import Benchmark
from curda.superpix import FEATURE_SIZE, build_superpixel_map


def scored_image(index: int, confidences: list[float], classes: list[int] | None = None) -> ScoredImage:
    count = len(confidences)
    spmap = build_superpixel_map(np.arange(count, dtype=np.int64).reshape(1, count), 1.0)
    labels = np.asarray(classes if classes is not None else [0] * count, dtype=np.int64)
    return ScoredImage(image_index=index, spmap=spmap, classes=labels, confidences=np.asarray(confidences, dtype=np.float64))


class TestSvm:
    """Tests for the Pegasos-trained one-vs-rest SVM."""

    def test_separable_data(self) -> None:
        """Two well separated classes are learned perfectly."""
        rng = SplitMix64(5)
        features = np.zeros((40, FEATURE_SIZE))
        features[:, 1:5] = rng.uniform(40 * 4).reshape(40, 4) * 2.0 - 1.0
        labels = np.arange(40, dtype=np.int64) % 2
        features[:, 0] = np.where(labels == 1, 3.0, -3.0)
        model = train_sp_svm(features, labels, 2, epochs=50, seed=1)
        predicted, _ = classify_many(model, features)
        assert_that(float((predicted == labels).mean())).is_equal_to(1.0)

    def test_zero_features_use_biases(self) -> None:
        """With all-zero features only the biases decide."""
        labels = np.array([1, 1, 1, 0, 2], dtype=np.int64)
        model = train_sp_svm(np.zeros((5, 4)), labels, 3, epochs=20)
        assert_that(float(np.abs(model.weights).sum())).is_equal_to(0.0)
        values = decision_values(model, np.zeros((1, 4)))
        assert_that(values[0].tolist()).is_equal_to(model.biases.tolist())
        assert_that(classify_sp(model, np.zeros(4))[0]).is_equal_to(int(np.argmax(model.biases)))

    def test_is_seeded(self) -> None:
        """The same seed gives the same hyperplanes."""
        rng = SplitMix64(2)
        features = rng.normal(30 * 6).reshape(30, 6)
        labels = (features[:, 0] > 0).astype(np.int64)
        a = train_sp_svm(features, labels, 2, epochs=5, seed=3, batch=8)
        b = train_sp_svm(features, labels, 2, epochs=5, seed=3, batch=8)
        assert_that(a.weights.tobytes()).is_equal_to(b.weights.tobytes())

    def test_weights_stay_in_ball(self) -> None:
        """Every hyperplane stays within radius 1 / sqrt(lambda)."""
        rng = SplitMix64(8)
        features = rng.normal(50 * 3).reshape(50, 3)
        labels = rng.integers(0, 3, 50)
        model = train_sp_svm(features, labels, 3, lam=0.1, epochs=10)
        norms = np.sqrt((model.weights**2).sum(axis=1) + model.biases**2)
        assert_that(float(norms.max())).is_less_than_or_equal_to(1.0 / math.sqrt(0.1) + 1e-9)

    def test_decision_rule(self) -> None:
        """Decision values (-1, 3, 0) give class 1 with confidence 3."""
        classes, confidences = classify_decisions(np.array([[-1.0, 3.0, 0.0], [2.0, 2.0, 1.0]]))
        assert_that(classes.tolist()).is_equal_to([1, 0])
        assert_that(confidences.tolist()).is_equal_to([3.0, 2.0])

    def test_input_checks(self) -> None:
        """Empty input and out-of-range labels are refused."""
        with pytest.raises(ValueError, match="equally many"):
            train_sp_svm(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), 2)
        with pytest.raises(ValueError, match="labels must lie"):
            train_sp_svm(np.zeros((2, 3)), np.array([0, 2], dtype=np.int64), 2)

    def test_save_and_load(self, tmp_path: Path) -> None:
        """A saved model loads back with its hyper-parameters."""
        model = train_sp_svm(SplitMix64(1).normal(12).reshape(6, 2), np.array([0, 1, 0, 1, 0, 1], dtype=np.int64), 2, epochs=3)
        loaded = SVMModel.load(model.save(tmp_path / "svm.cda"))
        assert_that(loaded.epochs).is_equal_to(3)
        assert_that(loaded.lam).is_equal_to(model.lam)
        assert_that(loaded.weights.tobytes()).is_equal_to(model.weights.tobytes())


class TestSelection:
    """Tests for landmark selection."""

    def test_landmark_count(self) -> None:
        """The count is ceil(ratio * total)."""
        assert_that(landmark_count(0.3, 100)).is_equal_to(30)
        assert_that(landmark_count(0.3, 7)).is_equal_to(3)
        assert_that(landmark_count(1.0, 9)).is_equal_to(9)

    def test_ratio_one_keeps_everything(self) -> None:
        """Ratio 1 selects every superpixel."""
        scored = [scored_image(0, [0.5, 0.1]), scored_image(1, [0.9])]
        assert_that(len(select_landmarks(scored, 1.0))).is_equal_to(3)

    def test_global_pool(self) -> None:
        """The most confident superpixels win across images."""
        scored = [scored_image(0, [0.1, 0.2, 0.3, 0.4, 0.5]), scored_image(1, [0.9, 0.8, 0.7, 0.6, 0.05])]
        landmarks = select_landmarks(scored, 0.3)
        assert_that(landmarks.keys()).is_equal_to({(1, 0), (1, 1), (1, 2)})
        assert_that(landmarks.for_image(0)).is_empty()

    def test_per_image_pool(self) -> None:
        """Per-image selection keeps ceil(ratio * count) in every image."""
        scored = [scored_image(0, [0.1, 0.2, 0.3, 0.4, 0.5]), scored_image(1, [0.9, 0.8, 0.7, 0.6, 0.05])]
        landmarks = select_landmarks(scored, 0.3, per_image=True)
        assert_that(landmarks.keys()).is_equal_to({(0, 4), (0, 3), (1, 0), (1, 1)})

    def test_ties_break_by_position(self) -> None:
        """Equal confidences prefer the lower image index, then the lower superpixel id."""
        scored = [scored_image(0, [0.5, 0.5]), scored_image(1, [0.5, 0.5])]
        assert_that(select_landmarks(scored, 0.5).keys()).is_equal_to({(0, 0), (0, 1)})

    def test_hundred_superpixels(self) -> None:
        """A 0.3 ratio over 100 superpixels keeps exactly 30."""
        confidences = SplitMix64(3).uniform(100).tolist()
        assert_that(len(select_landmarks([scored_image(0, confidences)], 0.3))).is_equal_to(30)

    def test_bad_ratio(self) -> None:
        """Ratios outside [0, 1] are refused."""
        with pytest.raises(ValueError, match="ratio"):
            select_landmarks([scored_image(0, [0.5])], -0.1)
        with pytest.raises(ValueError, match="ratio"):
            select_landmarks([scored_image(0, [0.5])], 1.5)

    def test_ratio_zero_selects_nothing(self) -> None:
        """Ratio 0 leaves every image without landmarks, in both pool modes."""
        scored = [scored_image(0, [0.9, 0.8]), scored_image(1, [0.7])]
        for per_image in (False, True):
            landmarks = select_landmarks(scored, 0.0, per_image=per_image)
            assert_that(len(landmarks)).is_zero()
            assert_that(landmarks.per_image).is_equal_to([[], []])
            assert_that(landmarks.ratio).is_equal_to(0.0)

    def test_save_and_load(self, tmp_path: Path) -> None:
        """A saved landmark set loads back with the same members."""
        landmarks = select_landmarks([scored_image(0, [0.2, 0.7], [3, 5]), scored_image(1, [0.4])], 0.5)
        loaded = LandmarkSet.load(landmarks.save(tmp_path / "landmarks.json"))
        assert_that(loaded.keys()).is_equal_to(landmarks.keys())
        assert_that(loaded.for_image(0)[0].class_id).is_equal_to(5)
        assert_that(loaded.ratio).is_equal_to(0.5)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Loading a missing landmark file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            LandmarkSet.load(tmp_path / "nope.json")

    def test_segmentation(self) -> None:
        """Only landmark superpixels are painted when landmarks are given."""
        item = scored_image(0, [0.9, 0.1, 0.5], [2, 4, 6])
        assert_that(superpixel_segmentation(item).tolist()).is_equal_to([[2, 4, 6]])
        landmarks = select_landmarks([item], 0.33)
        assert_that(superpixel_segmentation(item, landmarks.for_image(0)).tolist()).is_equal_to([[2, IGNORE_INDEX, IGNORE_INDEX]])


class TestDiagnostics:
    """Tests for confidence-ranking diagnostics."""

    def test_accuracies(self) -> None:
        """Landmark accuracy only counts selected superpixels."""
        item = scored_image(0, [0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0])
        truths = [np.array([1, 1, 1, 1], dtype=np.int64)]
        report = landmark_diagnostics([item], truths, select_landmarks([item], 0.5))
        assert_that(report.overall_accuracy).is_equal_to(0.5)
        assert_that(report.landmark_accuracy).is_equal_to(1.0)
        assert_that(report.top_curve[-1]).is_equal_to((1.0, 0.5))

    def test_deciles(self) -> None:
        """Buckets run from the least to the most confident."""
        confidences = np.array([0.1, 0.9, 0.2, 0.8])
        correct = np.array([False, True, False, True])
        assert_that(decile_accuracy(confidences, correct, buckets=2)).is_equal_to([0.0, 1.0])

    def test_top_curve(self) -> None:
        """The top 50% are the two most confident."""
        confidences = np.array([0.1, 0.9, 0.2, 0.8])
        correct = np.array([False, True, True, False])
        keys = [(0, i) for i in range(4)]
        assert_that(top_fraction_curve(confidences, correct, keys, (0.5, 1.0))).is_equal_to([(0.5, 0.5), (1.0, 0.5)])


class TestPipeline:
    """Tests for the end-to-end landmark pipeline."""

    def test_build_landmarks(self, tiny_benchmark: Benchmark) -> None:
        """Landmarks are a ratio of all target superpixels and the run is repeatable."""
        settings = SuperpixelSettings(count=8, iters=3)

        def run() -> tuple[int, set[tuple[int, int]], int]:
            result = build_landmarks(
                tiny_benchmark.source_train.images,
                tiny_benchmark.source_train.masks,
                tiny_benchmark.target_train.images,
                8,
                settings=settings,
                epochs=3,
                seed=4,
            )
            total = sum(item.spmap.count for item in result.scored)
            return len(result.landmarks), result.landmarks.keys(), total

        count, keys, total = run()
        assert_that(count).is_equal_to(landmark_count(0.3, total))
        assert_that(run()[1]).is_equal_to(keys)
