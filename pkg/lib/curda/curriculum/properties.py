"""Frozen per-image target properties: global label distributions and landmark regions."""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from curda.labeldist import GlobalEstimator
from curda.landmark import LandmarkSet
from curda.numerics import FloatArray, IntArray
from curda.superpix import SuperpixelMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LandmarkRegion:
    sp_id: int
    region: IntArray
    dist: FloatArray


@dataclass(frozen=True)
class TargetProperties:
    """Computed once before training and never updated by it."""

    image_dists: FloatArray
    landmarks: tuple[tuple[LandmarkRegion, ...], ...]

    def __len__(self) -> int:
        return int(self.image_dists.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.image_dists.shape[1])

    def fingerprint(self) -> str:
        """SHA-256 over every distribution and region, in order."""
        digest = hashlib.sha256(np.ascontiguousarray(self.image_dists).tobytes())
        for regions in self.landmarks:
            digest.update(len(regions).to_bytes(4, "little"))
            for item in regions:
                digest.update(item.sp_id.to_bytes(4, "little"))
                digest.update(np.ascontiguousarray(item.region).tobytes())
                digest.update(np.ascontiguousarray(item.dist).tobytes())
        return digest.hexdigest()


def build_target_properties(
    images: Sequence[FloatArray],
    estimator: GlobalEstimator,
    landmarks: LandmarkSet | None = None,
    maps: Sequence[SuperpixelMap] | None = None,
) -> TargetProperties:
    """
    Estimate the global label distribution of every target training image and
    attach its landmark superpixels as one-hot region targets.

    Images without landmarks get an empty region list.
    """
    dists = np.stack([estimator.estimate(image) for image in images])
    num_classes = dists.shape[1]
    per_image: list[tuple[LandmarkRegion, ...]] = []
    for index in range(len(images)):
        if landmarks is None or maps is None or index >= len(landmarks.per_image):
            per_image.append(())
            continue
        spmap = maps[index]
        per_image.append(tuple(LandmarkRegion(lm.sp_id, spmap.region(lm.sp_id), lm.distribution(num_classes)) for lm in landmarks.for_image(index)))
    total = sum(len(regions) for regions in per_image)
    logger.info("Target properties: %d images via %s, %d landmark regions", len(images), estimator.name, total)
    return TargetProperties(image_dists=dists, landmarks=tuple(per_image))
