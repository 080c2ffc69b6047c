"""Acceptance-scale trend tests.

These run on the default 64x64 benchmark with the default training length and
five seeds. The grid fixture trains every default method on every seed once
per module, which takes a long time on one core; set CDA_THREADS to use more.

These tests are marked with @pytest.mark.e2e and can be skipped with:
    pytest -m "not e2e"
"""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

import numpy as np
import pytest
from assertpy import assert_that

from curda.colorconst import fit_color_stats
from curda.config import ExperimentConfig
from curda.curriculum import TrainConfig, train
from curda.evaluation import chi2_report, evaluate_masks
from curda.experiment import (
    MixMode,
    all_estimators,
    fuse_cells,
    load_or_build_landmarks,
    load_or_generate_benchmark,
    run_experiment,
    run_mixing_study,
    target_views,
)
from curda.landmark import landmark_count, landmark_diagnostics
from curda.scenegen import Benchmark, SplitCounts, generate_benchmark
from curda.segmodel import predict_masks
from curda.superpix import dominant_labels, label_agreement, slic_segment

pytestmark = pytest.mark.e2e

SEEDS = (0, 1, 2, 3, 4)


def median(values: Iterable[float]) -> float:
    return float(np.median(list(values)))


@pytest.fixture(scope="module")
def acceptance_config(tmp_path_factory: pytest.TempPathFactory) -> ExperimentConfig:
    return ExperimentConfig(out=str(tmp_path_factory.mktemp("acceptance")))


@pytest.fixture(scope="module")
def cache_root(acceptance_config: ExperimentConfig) -> Path:
    return Path(acceptance_config.out) / "cache"


@pytest.fixture(scope="module")
def acceptance_benchmark(acceptance_config: ExperimentConfig, cache_root: Path) -> Benchmark:
    return load_or_generate_benchmark(acceptance_config, cache_root)


@pytest.fixture(scope="module")
def grid_medians(acceptance_config: ExperimentConfig) -> dict[str, float]:
    """Median target-test mIoU per method over the five training seeds."""
    summary = run_experiment(acceptance_config)
    assert_that(summary.failed).is_empty()
    per_method: dict[str, list[float]] = {}
    for record in summary.records:
        per_method.setdefault(record["method"], []).append(float(record["miou"]))
    return {method: median(values) for method, values in per_method.items()}


class TestEstimators:
    """Tests for the global label-distribution estimators on target validation."""

    def test_chi2_ordering(self, acceptance_config: ExperimentConfig, cache_root: Path) -> None:
        """Median chi2 over five datasets orders lr <= nn <= mean <= uniform."""
        per_estimator: dict[str, list[float]] = {}
        for seed in SEEDS:
            config = acceptance_config.with_overrides({"seed": seed})
            benchmark = load_or_generate_benchmark(config, cache_root)
            rows = chi2_report(all_estimators(config, benchmark, cache_root), benchmark.target_val.images, benchmark.target_val.masks, 8)
            for row in rows:
                per_estimator.setdefault(row.estimator, []).append(row.mean)
        medians = {name: median(values) for name, values in per_estimator.items()}
        assert_that(medians["lr"]).described_as(str(medians)).is_less_than_or_equal_to(medians["nn"])
        assert_that(medians["nn"]).described_as(str(medians)).is_less_than_or_equal_to(medians["mean"])
        assert_that(medians["mean"]).described_as(str(medians)).is_less_than_or_equal_to(medians["uniform"])


class TestLandmarks:
    """Tests for landmark precision."""

    def test_confident_superpixels_are_more_accurate(self, acceptance_config: ExperimentConfig, acceptance_benchmark: Benchmark, cache_root: Path) -> None:
        """The top 30% superpixels beat the overall SVM accuracy by 0.1 and number exactly ceil(0.3 N)."""
        target = acceptance_benchmark.target_train
        result = load_or_build_landmarks(acceptance_config, acceptance_benchmark, target.images, cc=False, cache_root=cache_root)
        truths = [dominant_labels(item.spmap, mask, 8) for item, mask in zip(result.scored, target.masks, strict=True)]
        report = landmark_diagnostics(result.scored, truths, result.landmarks)
        total = sum(item.spmap.count for item in result.scored)
        assert_that(len(result.landmarks)).is_equal_to(landmark_count(0.3, total))
        assert_that(report.overall_accuracy).is_greater_than_or_equal_to(0.6)
        assert_that(report.landmark_accuracy).described_as(f"overall {report.overall_accuracy:.4f}").is_greater_than_or_equal_to(report.overall_accuracy + 0.1)


class TestSuperpixels:
    """Tests for the oversegmentation at acceptance scale."""

    def test_agreement_grows_with_superpixel_count(self, acceptance_benchmark: Benchmark) -> None:
        """Dominant-label agreement does not drop from 50 to 100, 200 and 400 superpixels."""
        dataset = acceptance_benchmark.target_val
        agreements = [
            float(np.mean([label_agreement(slic_segment(image, count), mask, 8) for image, mask in zip(dataset.images, dataset.masks, strict=True)]))
            for count in (50, 100, 200, 400)
        ]
        assert_that(agreements).described_as(str(agreements)).is_equal_to(sorted(agreements))
        assert_that(agreements[1]).is_greater_than_or_equal_to(0.9)


class TestColorConstancy:
    """Tests for the calibration stage and its effect."""

    def test_calibrated_means_match_source(self, acceptance_benchmark: Benchmark) -> None:
        """Calibrated target-train channel means lie within 0.02 of the source means."""
        views = target_views(acceptance_benchmark, cc=True)
        assert views.calibration is not None
        calibrated = fit_color_stats(views.train).mean
        assert_that(float(np.abs(calibrated - views.calibration.reference.mean).max())).is_less_than_or_equal_to(0.02)

    def test_calibration_does_not_hurt(self, grid_medians: dict[str, float]) -> None:
        """NoAdapt(CC) is at least as good as NoAdapt."""
        assert_that(grid_medians["NoAdapt(CC)"]).described_as(str(grid_medians)).is_greater_than_or_equal_to(grid_medians["NoAdapt"])

    def test_best_method_uses_calibration(self, grid_medians: dict[str, float]) -> None:
        """The best method of the grid calibrates its target images."""
        best = max(grid_medians, key=lambda method: grid_medians[method])
        assert_that(best).described_as(str(grid_medians)).contains("CC")


class TestAdaptation:
    """Tests for the core adaptation trend."""

    def test_target_terms_beat_source_only(self, grid_medians: dict[str, float]) -> None:
        """Ours(I) and Ours(SP) beat NoAdapt and Ours(I+SP) gains at least 3 points."""
        described = str(grid_medians)
        assert_that(grid_medians["Ours(I)"]).described_as(described).is_greater_than(grid_medians["NoAdapt"])
        assert_that(grid_medians["Ours(SP)"]).described_as(described).is_greater_than(grid_medians["NoAdapt"])
        assert_that(grid_medians["Ours(I+SP)"]).described_as(described).is_greater_than_or_equal_to(grid_medians["NoAdapt"] + 0.03)


class TestFusion:
    """Tests for class-wise late fusion of two grid cells."""

    def test_fusion_keeps_the_better_model(self, acceptance_config: ExperimentConfig, grid_medians: dict[str, float]) -> None:
        """Fusing Ours(CC+I+SP) with NoAdapt(CC) loses at most half a point to the better one."""
        assert_that(grid_medians).contains_key("Ours(CC+I+SP)", "NoAdapt(CC)")
        for seed in SEEDS:
            result = fuse_cells(acceptance_config, ("Ours(CC+I+SP)", seed), ("NoAdapt(CC)", seed))
            assert_that(result.miou_fused).described_as(f"seed {seed}").is_greater_than_or_equal_to(max(result.miou_a, result.miou_b) - 0.005)


class TestMixing:
    """Tests for the labeled-target mixing study."""

    def test_source_data_helps_small_budgets(self, acceptance_config: ExperimentConfig) -> None:
        """Source data adds 2 points at 10% and 20% labeled targets and stops mattering at 100%."""
        config = acceptance_config.with_overrides({"seeds": [0, 1, 2]})
        rows = run_mixing_study(config, (0.1, 0.2, 1.0), Path(acceptance_config.out) / "mixing")
        scores: dict[tuple[float, MixMode], list[float]] = {}
        for row in rows:
            assert row.miou is not None
            scores.setdefault((row.fraction, row.mode), []).append(row.miou)
        medians = {key: median(values) for key, values in scores.items()}
        for fraction in (0.1, 0.2):
            mixed, alone = medians[(fraction, MixMode.SOURCE_AND_TARGET)], medians[(fraction, MixMode.TARGET_ONLY)]
            assert_that(mixed).described_as(f"fraction {fraction}").is_greater_than_or_equal_to(alone + 0.02)
        gap = medians[(1.0, MixMode.SOURCE_AND_TARGET)] - medians[(1.0, MixMode.TARGET_ONLY)]
        assert_that(abs(gap)).is_less_than_or_equal_to(0.02)


class TestTraining:
    """Tests for plain source-only training."""

    def test_source_only_training_fits_the_source(self) -> None:
        """300 steps on 20 source scenes reach a source-train mIoU of 0.6."""
        benchmark = generate_benchmark(0, SplitCounts(source_train=20, target_train=1, target_val=1, target_test=1), 64, 64)
        source = benchmark.source_train
        result = train(TrainConfig.no_adapt(steps=300), source.images, source.masks, [], None, 8)
        _, report = evaluate_masks(predict_masks(result.params, source.images), source.masks, 8)
        assert_that(report.miou).is_greater_than_or_equal_to(0.6)
