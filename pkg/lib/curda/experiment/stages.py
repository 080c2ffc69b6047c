"""Shared, content-addressed pipeline stages: datasets, estimators and landmarks.

Each stage writes its artifacts under ``<out>/cache/<stage>-<hash>/`` where the
hash covers exactly the configuration keys the stage depends on, and finishes
by creating a ``.done`` marker. A directory without the marker is rebuilt.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import shutil
from collections.abc import Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from curda.colorconst import CalibrationRecord, calibrate_images, fit_calibration
from curda.config import ExperimentConfig
from curda.io import load_bundle, save_bundle
from curda.labeldist import (
    EstimatorKind,
    GlobalEstimator,
    LogisticEstimator,
    LREstimator,
    build_estimator,
    gt_label_distribution,
    image_descriptors,
)
from curda.landmark import LandmarkResult, LandmarkSet, SuperpixelSettings, SVMModel, build_landmarks, score_image
from curda.numerics import FloatArray
from curda.scenegen import Benchmark, DomainKind, SplitCounts, default_domain_params, generate_benchmark, load_benchmark, save_benchmark
from curda.superpix import SuperpixelMap, build_superpixel_map

logger = logging.getLogger(__name__)

DONE_MARKER = ".done"

DATA_KEYS: tuple[str, ...] = ("seed", "width", "height", "source_count", "target_train_count", "target_val_count", "target_test_count", "target_tint")
ESTIMATOR_KEYS: tuple[str, ...] = (*DATA_KEYS, "nn_k", "lr_epochs", "lr_rate")
LANDMARK_KEYS: tuple[str, ...] = (
    *DATA_KEYS,
    "sp_count",
    "compactness",
    "slic_iters",
    "probe_scale",
    "landmark_ratio",
    "landmark_per_image",
    "svm_lambda",
    "svm_epochs",
)


def content_hash(config: ExperimentConfig, keys: Sequence[str], **extra: Any) -> str:
    """First 16 hex digits of the SHA-256 of the selected config values."""
    data = config.to_dict()
    payload = {key: data[key] for key in keys} | extra
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()[:16]


def _fresh_directory(directory: Path) -> Path:
    if directory.exists():
        shutil.rmtree(directory)
    directory.mkdir(parents=True)
    return directory


def benchmark_directory(config: ExperimentConfig, cache_root: Path) -> Path:
    return cache_root / f"data-{content_hash(config, DATA_KEYS)}"


def load_or_generate_benchmark(config: ExperimentConfig, cache_root: Path, workers: int | None = None) -> Benchmark:
    directory = benchmark_directory(config, cache_root)
    if (directory / DONE_MARKER).exists():
        logger.debug("Loading cached benchmark from %s", directory)
        return load_benchmark(directory)
    tint = config.target_tint
    target_params = replace(default_domain_params(DomainKind.TARGET_LIKE), tint=(tint[0], tint[1], tint[2]))
    counts = SplitCounts(config.source_count, config.target_train_count, config.target_val_count, config.target_test_count)
    benchmark = generate_benchmark(config.seed, counts, config.width, config.height, target_params=target_params, workers=workers)
    save_benchmark(benchmark, _fresh_directory(directory))
    (directory / DONE_MARKER).touch()
    logger.info("Generated benchmark in %s", directory)
    return benchmark


@dataclass(frozen=True)
class TargetViews:
    """Target images as the methods see them, calibrated or not."""

    train: list[FloatArray]
    val: list[FloatArray]
    test: list[FloatArray]
    calibration: CalibrationRecord | None = None


def target_views(benchmark: Benchmark, cc: bool) -> TargetViews:
    """With ``cc`` every target split is calibrated with statistics of the target training split."""
    train, val, test = benchmark.target_train.images, benchmark.target_val.images, benchmark.target_test.images
    if not cc:
        return TargetViews(train=train, val=val, test=test)
    record = fit_calibration(benchmark.source_train.images, train)
    return TargetViews(
        train=calibrate_images(train, record.target, record.reference),
        val=calibrate_images(val, record.target, record.reference),
        test=calibrate_images(test, record.target, record.reference),
        calibration=record,
    )


def _source_statistics(benchmark: Benchmark) -> tuple[FloatArray, FloatArray]:
    source = benchmark.source_train
    descriptors = image_descriptors(source.images)
    dists = np.stack([gt_label_distribution(mask, source.num_classes) for mask in source.masks])
    return descriptors, dists


def fit_estimator(config: ExperimentConfig, benchmark: Benchmark, kind: EstimatorKind | str, cache_root: Path | None = None) -> GlobalEstimator:
    """Build one estimator; fitted logistic-regression weights are cached."""
    kind = EstimatorKind(kind)
    cache_file: Path | None = None
    if kind is EstimatorKind.LR and cache_root is not None:
        cache_file = cache_root / f"estimator-{content_hash(config, ESTIMATOR_KEYS, kind=kind.value)}.cda"
        if cache_file.exists():
            return LogisticEstimator(LREstimator.load(cache_file))
    descriptors, dists = _source_statistics(benchmark)
    estimator = build_estimator(kind, descriptors, dists, nn_k=config.nn_k, lr_epochs=config.lr_epochs, lr_rate=config.lr_rate, seed=config.seed)
    if cache_file is not None and isinstance(estimator, LogisticEstimator):
        estimator.model.save(cache_file)
    return estimator


def all_estimators(config: ExperimentConfig, benchmark: Benchmark, cache_root: Path | None = None) -> list[GlobalEstimator]:
    return [fit_estimator(config, benchmark, kind, cache_root) for kind in EstimatorKind]


def superpixel_settings(config: ExperimentConfig) -> SuperpixelSettings:
    return SuperpixelSettings(count=config.sp_count, compactness=config.compactness, iters=config.slic_iters, probe_scale=config.probe_scale)


def load_or_build_landmarks(
    config: ExperimentConfig,
    benchmark: Benchmark,
    target_images: list[FloatArray],
    *,
    cc: bool,
    cache_root: Path,
    workers: int | None = None,
) -> LandmarkResult:
    """Superpixel SVM, scored target-training superpixels and landmarks, cached per CC setting."""
    directory = cache_root / f"landmarks-{content_hash(config, LANDMARK_KEYS, cc=cc)}"
    settings = superpixel_settings(config)
    if (directory / DONE_MARKER).exists():
        model = SVMModel.load(directory / "svm.cda")
        sections = load_bundle(directory / "superpixels.cda")
        step = math.sqrt(config.width * config.height / config.sp_count)
        maps: list[SuperpixelMap] = [build_superpixel_map(np.asarray(sections[f"{i:04d}"], dtype=np.int64), step) for i in range(len(target_images))]
        scored = [score_image(model, image, spmap, index, settings.probe_scale) for index, (image, spmap) in enumerate(zip(target_images, maps, strict=True))]
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
        landmarks = LandmarkSet.load(directory / "landmarks.json")
        return LandmarkResult(model=model, scored=scored, landmarks=landmarks, train_accuracy=float(meta["train_accuracy"]))
    source = benchmark.source_train
    result = build_landmarks(
        source.images,
        source.masks,
        target_images,
        source.num_classes,
        settings=settings,
        lam=config.svm_lambda,
        epochs=config.svm_epochs,
        ratio=config.landmark_ratio,
        per_image=config.landmark_per_image,
        seed=config.seed,
        workers=workers,
    )
    _fresh_directory(directory)
    result.model.save(directory / "svm.cda")
    save_bundle(directory / "superpixels.cda", {f"{item.image_index:04d}": item.spmap.ids.astype(np.int32) for item in result.scored})
    result.landmarks.save(directory / "landmarks.json")
    (directory / "meta.json").write_text(json.dumps({"train_accuracy": result.train_accuracy}), encoding="utf-8")
    (directory / DONE_MARKER).touch()
    return result
