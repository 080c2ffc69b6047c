"""From labeled source scenes and unlabeled target images to a landmark set."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from curda.landmark.selection import DEFAULT_RATIO, LandmarkSet, ScoredImage, score_image, select_landmarks
from curda.landmark.svm import DEFAULT_EPOCHS, DEFAULT_LAMBDA, SVMModel, classify_many, train_sp_svm
from curda.numerics import FloatArray, IntArray
from curda.parallel import worker_count
from curda.superpix import SuperpixelMap, dominant_labels, slic_segment, superpixel_features

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuperpixelSettings:
    count: int = 100
    compactness: float = 10.0
    iters: int = 10
    probe_scale: float = 1.0


@dataclass(frozen=True)
class LandmarkResult:
    model: SVMModel
    scored: list[ScoredImage]
    landmarks: LandmarkSet
    train_accuracy: float


def segment_all(images: list[FloatArray], settings: SuperpixelSettings, workers: int | None = None) -> list[SuperpixelMap]:
    """Oversegment every image; the result does not depend on the worker count."""

    def run(image: FloatArray) -> SuperpixelMap:
        return slic_segment(image, settings.count, settings.compactness, settings.iters)

    threads = worker_count(workers)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, images))
    return [run(image) for image in images]


def source_training_set(
    images: list[FloatArray],
    masks: list[IntArray],
    maps: list[SuperpixelMap],
    num_classes: int,
    probe_scale: float = 1.0,
) -> tuple[FloatArray, IntArray]:
    """Stacked superpixel features and dominant labels over all source images."""
    features = [superpixel_features(image, spmap, probe_scale) for image, spmap in zip(images, maps, strict=True)]
    labels = [dominant_labels(spmap, mask, num_classes) for spmap, mask in zip(maps, masks, strict=True)]
    return np.concatenate(features, axis=0), np.concatenate(labels, axis=0)


def build_landmarks(
    source_images: list[FloatArray],
    source_masks: list[IntArray],
    target_images: list[FloatArray],
    num_classes: int,
    *,
    settings: SuperpixelSettings | None = None,
    lam: float = DEFAULT_LAMBDA,
    epochs: int = DEFAULT_EPOCHS,
    ratio: float = DEFAULT_RATIO,
    per_image: bool = False,
    seed: int = 0,
    workers: int | None = None,
) -> LandmarkResult:
    """Train the superpixel SVM on the source domain, score every target superpixel and select landmarks."""
    settings = settings or SuperpixelSettings()
    source_maps = segment_all(source_images, settings, workers)
    features, labels = source_training_set(source_images, source_masks, source_maps, num_classes, settings.probe_scale)
    model = train_sp_svm(features, labels, num_classes, lam, epochs, seed)
    predicted, _ = classify_many(model, features)
    train_accuracy = float((predicted == labels).mean())
    logger.info("Superpixel SVM: %d source superpixels, training accuracy %.3f", labels.size, train_accuracy)
    target_maps = segment_all(target_images, settings, workers)
    scored = [score_image(model, image, spmap, index, settings.probe_scale) for index, (image, spmap) in enumerate(zip(target_images, target_maps, strict=True))]
    landmarks = select_landmarks(scored, ratio, per_image=per_image, num_classes=num_classes)
    return LandmarkResult(model=model, scored=scored, landmarks=landmarks, train_accuracy=train_accuracy)
