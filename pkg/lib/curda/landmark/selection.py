"""Scoring target superpixels and keeping the most confident ones as landmarks."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from curda.labeldist.distributions import one_hot_distribution
from curda.landmark.svm import SVMModel, classify_many
from curda.numerics import IGNORE_INDEX, FloatArray, IntArray
from curda.scenegen.params import NUM_CLASSES
from curda.superpix import SuperpixelMap, superpixel_features

logger = logging.getLogger(__name__)

DEFAULT_RATIO = 0.3
LANDMARKS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScoredImage:
    """SVM class and confidence for every superpixel of one target image."""

    image_index: int
    spmap: SuperpixelMap
    classes: IntArray
    confidences: FloatArray


@dataclass(frozen=True)
class Landmark:
    image_index: int
    sp_id: int
    class_id: int
    confidence: float

    def distribution(self, num_classes: int) -> FloatArray:
        return one_hot_distribution(self.class_id, num_classes)

    def to_dict(self) -> dict[str, Any]:
        return {"sp_id": self.sp_id, "class": self.class_id, "confidence": self.confidence}


@dataclass
class LandmarkSet:
    """Landmarks grouped by target image; every image index has a (possibly empty) list."""

    num_classes: int
    ratio: float
    per_image: list[list[Landmark]] = field(default_factory=list[list[Landmark]])

    @classmethod
    def empty(cls, num_images: int, num_classes: int) -> LandmarkSet:
        return cls(num_classes=num_classes, ratio=0.0, per_image=[[] for _ in range(num_images)])

    def __len__(self) -> int:
        return sum(len(items) for items in self.per_image)

    def for_image(self, image_index: int) -> list[Landmark]:
        return self.per_image[image_index]

    def keys(self) -> set[tuple[int, int]]:
        return {(lm.image_index, lm.sp_id) for items in self.per_image for lm in items}

    def to_json(self) -> dict[str, Any]:
        return {
            "format_version": LANDMARKS_FORMAT_VERSION,
            "num_classes": self.num_classes,
            "ratio": self.ratio,
            "images": [[lm.to_dict() for lm in items] for items in self.per_image],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> LandmarkSet:
        per_image = [
            [Landmark(image_index=index, sp_id=int(item["sp_id"]), class_id=int(item["class"]), confidence=float(item["confidence"])) for item in items]
            for index, items in enumerate(data["images"])
        ]
        return cls(num_classes=int(data["num_classes"]), ratio=float(data["ratio"]), per_image=per_image)

    def save(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json(), indent=2), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> LandmarkSet:
        if not path.exists():
            msg = f"Landmark file not found: {path}"
            raise FileNotFoundError(msg)
        return cls.from_json(json.loads(path.read_text(encoding="utf-8")))


def landmark_count(ratio: float, total: int) -> int:
    """ceil(ratio * total), with the product rounded to 9 decimals first."""
    return min(total, math.ceil(round(ratio * total, 9)))


def score_image(model: SVMModel, image: FloatArray, spmap: SuperpixelMap, image_index: int, probe_scale: float = 1.0) -> ScoredImage:
    classes, confidences = classify_many(model, superpixel_features(image, spmap, probe_scale))
    return ScoredImage(image_index=image_index, spmap=spmap, classes=classes, confidences=confidences)


def _ranked(candidates: list[tuple[int, int, int, float]]) -> list[tuple[int, int, int, float]]:
    # highest confidence first, ties by (image index, superpixel id)
    return sorted(candidates, key=lambda item: (-item[3], item[0], item[1]))


def select_landmarks(
    scored: Sequence[ScoredImage],
    ratio: float = DEFAULT_RATIO,
    *,
    per_image: bool = False,
    num_classes: int = NUM_CLASSES,
) -> LandmarkSet:
    """
    Keep the most confident superpixels as landmarks.

    By default the pool spans the whole target set and ceil(ratio * total)
    superpixels are kept; with ``per_image`` each image keeps ceil(ratio * count).
    Ratio 0 gives an empty set, so the superpixel term contributes nothing.

    Raises:
        ValueError: if ratio is outside [0, 1] or there are no superpixels.
    """
    if not 0.0 <= ratio <= 1.0:
        msg = f"ratio must lie in [0, 1], got {ratio}"
        raise ValueError(msg)
    if not scored or sum(item.spmap.count for item in scored) == 0:
        msg = "cannot select landmarks from an empty pool"
        raise ValueError(msg)
    pools: list[list[tuple[int, int, int, float]]] = []
    for item in scored:
        pools.append([(item.image_index, sp, int(item.classes[sp]), float(item.confidences[sp])) for sp in range(item.spmap.count)])
    if per_image:
        chosen = [candidate for pool in pools for candidate in _ranked(pool)[: landmark_count(ratio, len(pool))]]
    else:
        everything = [candidate for pool in pools for candidate in pool]
        chosen = _ranked(everything)[: landmark_count(ratio, len(everything))]
    num_images = max(item.image_index for item in scored) + 1
    result = LandmarkSet(num_classes=num_classes, ratio=ratio, per_image=[[] for _ in range(num_images)])
    for image_index, sp_id, class_id, confidence in _ranked(chosen):
        result.per_image[image_index].append(Landmark(image_index, sp_id, class_id, confidence))
    logger.info("Selected %d landmarks from %d target superpixels", len(chosen), sum(len(pool) for pool in pools))
    return result


def superpixel_segmentation(scored: ScoredImage, landmarks: Sequence[Landmark] | None = None) -> IntArray:
    """
    Paint each superpixel with its SVM class.

    With ``landmarks`` only those superpixels are painted and every other
    pixel gets the ignore label.
    """
    if landmarks is None:
        return scored.classes[scored.spmap.ids]
    lookup = np.full(scored.spmap.count, IGNORE_INDEX, dtype=np.int64)
    for landmark in landmarks:
        lookup[landmark.sp_id] = landmark.class_id
    return lookup[scored.spmap.ids]
