"""One grid cell: a (method, seed) pair trained, predicted and scored on the target test split."""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Any

import numpy as np

from curda.config import ExperimentConfig
from curda.curriculum import TrainConfig, build_target_properties, train, write_history_csv
from curda.evaluation import class_fraction, evaluate_masks, save_confusion_csv
from curda.experiment.methods import Family, MethodSpec
from curda.experiment.stages import (
    DONE_MARKER,
    fit_estimator,
    load_or_build_landmarks,
    load_or_generate_benchmark,
    superpixel_settings,
    target_views,
)
from curda.io import load_bundle, save_bundle
from curda.landmark import SVMModel, SuperpixelSettings, score_image, segment_all, select_landmarks, superpixel_segmentation
from curda.numerics import FloatArray, IntArray
from curda.scenegen.params import CLASS_NAMES, ROAD
from curda.segmodel import predict_masks, save_checkpoint

logger = logging.getLogger(__name__)

RESULT_SCHEMA_VERSION = 1
RESULT_NAME = "result.json"
PREDICTION_FILES = {"val": "preds_val.cda", "test": "preds_test.cda"}


def cell_name(spec: MethodSpec, seed: int) -> str:
    return f"{spec.slug}__seed{seed}"


def cell_directory(out_root: Path, spec: MethodSpec, seed: int) -> Path:
    return out_root / "cells" / cell_name(spec, seed)


def is_done(out_root: Path, spec: MethodSpec, seed: int) -> bool:
    return (cell_directory(out_root, spec, seed) / DONE_MARKER).exists()


def train_config_for(config: ExperimentConfig, spec: MethodSpec, seed: int) -> TrainConfig:
    if spec.family is Family.NO_ADAPT:
        return TrainConfig.no_adapt(
            k=config.k,
            steps=config.steps,
            seed=seed,
            features=config.features,
            src_batch=config.no_adapt_batch,
            use_cc=spec.cc,
            checkpoint_every=config.checkpoint_every,
        )
    return TrainConfig(
        gamma=config.gamma,
        k=config.k,
        src_batch=config.src_batch,
        tgt_batch=config.tgt_batch,
        steps=config.steps,
        seed=seed,
        use_image_term=spec.image_term,
        use_sp_term=spec.sp_term,
        use_cc=spec.cc,
        features=config.features,
        checkpoint_every=config.checkpoint_every,
    )


def superpixel_predictions(
    model: SVMModel,
    images: list[FloatArray],
    settings: SuperpixelSettings,
    *,
    landmarks_only: bool,
    ratio: float,
    per_image: bool,
) -> list[IntArray]:
    """Masks painted from SVM classes; with ``landmarks_only`` non-landmark pixels are void."""
    maps = segment_all(images, settings)
    scored = [score_image(model, image, spmap, index, settings.probe_scale) for index, (image, spmap) in enumerate(zip(images, maps, strict=True))]
    if not landmarks_only:
        return [superpixel_segmentation(item) for item in scored]
    landmarks = select_landmarks(scored, ratio, per_image=per_image, num_classes=model.num_classes)
    return [superpixel_segmentation(item, landmarks.for_image(item.image_index)) for item in scored]


def save_predictions(path: Path, masks: list[IntArray]) -> Path:
    return save_bundle(path, {f"{index:04d}": mask.astype(np.int32) for index, mask in enumerate(masks)})


def load_predictions(path: Path) -> list[IntArray]:
    sections = load_bundle(path)
    return [np.asarray(sections[tag], dtype=np.int64) for tag in sorted(sections)]


def run_cell(config: ExperimentConfig, spec: MethodSpec, seed: int, out_root: Path) -> dict[str, Any]:
    """
    Train (or score, for the superpixel baselines) one method with one seed,
    write its artifacts and completion marker, and return its result record.
    """
    started = time.perf_counter()
    cache = out_root / "cache"
    directory = cell_directory(out_root, spec, seed)
    directory.mkdir(parents=True, exist_ok=True)
    benchmark = load_or_generate_benchmark(config, cache)
    views = target_views(benchmark, spec.cc)
    num_classes = benchmark.source_train.num_classes
    history_file: str | None = None

    if spec.trains_network:
        train_config = train_config_for(config, spec, seed)
        props = None
        if spec.family is Family.OURS:
            estimator = fit_estimator(config, benchmark, config.estimator, cache)
            landmark_result = load_or_build_landmarks(config, benchmark, views.train, cc=spec.cc, cache_root=cache) if spec.sp_term else None
            props = build_target_properties(
                views.train,
                estimator,
                landmark_result.landmarks if landmark_result else None,
                [item.spmap for item in landmark_result.scored] if landmark_result else None,
            )
        checkpoints = directory / "checkpoints" if config.checkpoint_every else None
        result = train(train_config, benchmark.source_train.images, benchmark.source_train.masks, views.train, props, num_classes, checkpoint_dir=checkpoints)
        save_checkpoint(directory / "model.ckpt", result.params, result.state)
        write_history_csv(directory / "history.csv", result.history)
        history_file = "history.csv"
        val_preds = predict_masks(result.params, views.val)
        test_preds = predict_masks(result.params, views.test)
    else:
        landmark_result = load_or_build_landmarks(config, benchmark, views.train, cc=spec.cc, cache_root=cache)
        settings = superpixel_settings(config)
        only = spec.family is Family.SP_LANDMARK
        val_preds = superpixel_predictions(landmark_result.model, views.val, settings, landmarks_only=only, ratio=config.landmark_ratio, per_image=config.landmark_per_image)
        test_preds = superpixel_predictions(landmark_result.model, views.test, settings, landmarks_only=only, ratio=config.landmark_ratio, per_image=config.landmark_per_image)

    save_predictions(directory / PREDICTION_FILES["val"], val_preds)
    save_predictions(directory / PREDICTION_FILES["test"], test_preds)
    cm, report = evaluate_masks(test_preds, benchmark.target_test.masks, num_classes)
    save_confusion_csv(directory / "confusion_normalized.csv", cm, CLASS_NAMES[:num_classes], normalized=True)
    scores = report.to_dict(CLASS_NAMES[:num_classes])
    record: dict[str, Any] = {
        "schema_version": RESULT_SCHEMA_VERSION,
        "method": spec.name,
        "cell": cell_name(spec, seed),
        "seed": seed,
        "status": "ok",
        "miou": scores["miou"],
        "per_class": scores["per_class"],
        "confusion": cm.counts.tolist(),
        "road_fraction_pred": class_fraction(test_preds, ROAD),
        "road_fraction_gt": class_fraction(benchmark.target_test.masks, ROAD),
        "history": history_file,
    }
    write_cell_record(directory, record, wall_clock=time.perf_counter() - started)
    (directory / DONE_MARKER).touch()
    logger.info("%s seed %d: mIoU %.4f", spec.name, seed, report.miou)
    return record


def write_cell_record(directory: Path, record: dict[str, Any], *, wall_clock: float | None = None) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / RESULT_NAME).write_text(json.dumps(record, indent=2, sort_keys=True), encoding="utf-8")
    if wall_clock is not None:
        (directory / "timing.json").write_text(json.dumps({"wall_clock_s": wall_clock}), encoding="utf-8")


def read_cell_record(out_root: Path, spec: MethodSpec, seed: int) -> dict[str, Any]:
    return json.loads((cell_directory(out_root, spec, seed) / RESULT_NAME).read_text(encoding="utf-8"))


def failed_record(spec: MethodSpec, seed: int, error: BaseException) -> dict[str, Any]:
    return {
        "schema_version": RESULT_SCHEMA_VERSION,
        "method": spec.name,
        "cell": cell_name(spec, seed),
        "seed": seed,
        "status": "failed",
        "error": f"{type(error).__name__}: {error}",
    }
