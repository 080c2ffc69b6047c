"""Diagonal (von Kries) color calibration of target images toward source statistics."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from curda.numerics import FloatArray

logger = logging.getLogger(__name__)

GAIN_MIN = 0.25
GAIN_MAX = 4.0
PERCENTILE = 95.0


@dataclass(frozen=True)
class ColorStats:
    """Per-channel mean and 95th percentile of a pooled set of pixels."""

    mean: FloatArray
    p95: FloatArray

    def to_dict(self) -> dict[str, Any]:
        return {"mean": [float(v) for v in self.mean], "p95": [float(v) for v in self.p95]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ColorStats:
        return cls(mean=np.array(data["mean"], dtype=np.float64), p95=np.array(data["p95"], dtype=np.float64))


def fit_color_stats(images: list[FloatArray]) -> ColorStats:
    """Pool all pixels of all images; exact mean and linearly interpolated 95th percentile."""
    if not images:
        msg = "cannot fit color statistics to an empty image list"
        raise ValueError(msg)
    pixels = np.concatenate([image.reshape(-1, 3) for image in images], axis=0)
    return ColorStats(mean=pixels.mean(axis=0), p95=np.percentile(pixels, PERCENTILE, axis=0))


def channel_gains(image_stats: ColorStats, ref_stats: ColorStats) -> FloatArray:
    """ref_mean / image_mean per channel, clamped to [0.25, 4]."""
    if np.any(image_stats.mean <= 0.0):
        msg = f"image statistics have a zero-mean channel: {image_stats.mean.tolist()}"
        raise ValueError(msg)
    return np.clip(ref_stats.mean / image_stats.mean, GAIN_MIN, GAIN_MAX)


def calibrate(image: FloatArray, image_stats: ColorStats, ref_stats: ColorStats) -> FloatArray:
    return np.clip(image * channel_gains(image_stats, ref_stats), 0.0, 1.0)


def calibrate_images(images: list[FloatArray], image_stats: ColorStats, ref_stats: ColorStats) -> list[FloatArray]:
    """Calibrate every image with one set of statistics (fit on the target training split)."""
    gains = channel_gains(image_stats, ref_stats)
    logger.debug("Color gains %s", np.round(gains, 4).tolist())
    return [np.clip(image * gains, 0.0, 1.0) for image in images]


@dataclass(frozen=True)
class CalibrationRecord:
    reference: ColorStats
    target: ColorStats
    gains: FloatArray

    def save(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"reference": self.reference.to_dict(), "target": self.target.to_dict(), "gains": [float(g) for g in self.gains]}
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        return path


def fit_calibration(source_images: list[FloatArray], target_train_images: list[FloatArray]) -> CalibrationRecord:
    reference = fit_color_stats(source_images)
    target = fit_color_stats(target_train_images)
    return CalibrationRecord(reference=reference, target=target, gains=channel_gains(target, reference))
