"""How well SVM confidence ranks target superpixels by correctness."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from curda.landmark.selection import LandmarkSet, ScoredImage, landmark_count
from curda.numerics import FloatArray, IntArray

TOP_FRACTIONS: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class LandmarkDiagnostics:
    overall_accuracy: float
    landmark_accuracy: float
    decile_accuracy: list[float]
    top_curve: list[tuple[float, float]]

    def to_dict(self) -> dict[str, object]:
        return {
            "overall_accuracy": self.overall_accuracy,
            "landmark_accuracy": self.landmark_accuracy,
            "decile_accuracy": self.decile_accuracy,
            "top_curve": [{"fraction": fraction, "accuracy": accuracy} for fraction, accuracy in self.top_curve],
        }


def _flatten(scored: Sequence[ScoredImage], truths: Sequence[IntArray]) -> tuple[FloatArray, np.ndarray, list[tuple[int, int]]]:
    confidences: list[float] = []
    correct: list[bool] = []
    keys: list[tuple[int, int]] = []
    for item, truth in zip(scored, truths, strict=True):
        for sp in range(item.spmap.count):
            confidences.append(float(item.confidences[sp]))
            correct.append(bool(item.classes[sp] == truth[sp]))
            keys.append((item.image_index, sp))
    return np.array(confidences), np.array(correct, dtype=bool), keys


def _confidence_order(confidences: FloatArray, keys: list[tuple[int, int]]) -> list[int]:
    return sorted(range(len(keys)), key=lambda i: (-confidences[i], keys[i][0], keys[i][1]))


def decile_accuracy(confidences: FloatArray, correct: np.ndarray, buckets: int = 10) -> list[float]:
    """Accuracy per confidence bucket, lowest-confidence bucket first (NaN for empty buckets)."""
    order = np.argsort(confidences, kind="stable")
    parts = np.array_split(order, buckets)
    return [float(correct[part].mean()) if part.size else float("nan") for part in parts]


def top_fraction_curve(
    confidences: FloatArray,
    correct: np.ndarray,
    keys: list[tuple[int, int]],
    fractions: Sequence[float] = TOP_FRACTIONS,
) -> list[tuple[float, float]]:
    """Accuracy of the ceil(x * N) most confident superpixels for each fraction x."""
    ranked = np.array(_confidence_order(confidences, keys), dtype=np.int64)
    curve: list[tuple[float, float]] = []
    for fraction in fractions:
        top = ranked[: landmark_count(fraction, ranked.size)]
        curve.append((fraction, float(correct[top].mean()) if top.size else float("nan")))
    return curve


def landmark_diagnostics(scored: Sequence[ScoredImage], truths: Sequence[IntArray], landmarks: LandmarkSet) -> LandmarkDiagnostics:
    """
    Compare SVM classes with per-superpixel ground-truth classes.

    ``truths[i]`` holds the dominant true class of every superpixel of
    ``scored[i]``.
    """
    confidences, correct, keys = _flatten(scored, truths)
    selected = landmarks.keys()
    chosen = np.array([key in selected for key in keys], dtype=bool)
    return LandmarkDiagnostics(
        overall_accuracy=float(correct.mean()) if correct.size else float("nan"),
        landmark_accuracy=float(correct[chosen].mean()) if chosen.any() else float("nan"),
        decile_accuracy=decile_accuracy(confidences, correct),
        top_curve=top_fraction_curve(confidences, correct, keys),
    )
