"""Estimator chi-squared tables and method comparisons."""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from curda.labeldist import GlobalEstimator, chi2_distance, gt_label_distribution
from curda.numerics import FloatArray, IntArray


@dataclass(frozen=True)
class Chi2Row:
    estimator: str
    mean: float
    std: float
    count: int


def chi2_report(estimators: Sequence[GlobalEstimator], images: Sequence[FloatArray], masks: Sequence[IntArray], num_classes: int) -> list[Chi2Row]:
    """Mean and standard deviation of chi2(ground truth, estimate) per estimator."""
    truths = [gt_label_distribution(mask, num_classes) for mask in masks]
    rows: list[Chi2Row] = []
    for estimator in estimators:
        distances = np.array([chi2_distance(truth, estimator.estimate(image)) for image, truth in zip(images, truths, strict=True)])
        rows.append(Chi2Row(estimator=estimator.name, mean=float(distances.mean()), std=float(distances.std()), count=int(distances.size)))
    return rows


def save_chi2_csv(path: Path, rows: Sequence[Chi2Row]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["estimator", "mean", "std", "count"])
        for row in rows:
            writer.writerow([row.estimator, repr(row.mean), repr(row.std), row.count])
    return path


def win_matrix(per_class: Mapping[str, Sequence[float]]) -> dict[str, list[int]]:
    """1 where a method has the strictly best IoU on a class (all tied leaders get 1)."""
    methods = list(per_class)
    if not methods:
        return {}
    table = np.array([[(-math.inf if math.isnan(v) else v) for v in per_class[m]] for m in methods])
    best = table.max(axis=0)
    return {method: [int(v == b and math.isfinite(b)) for v, b in zip(table[i], best, strict=True)] for i, method in enumerate(methods)}


def pairwise_wins(per_class: Mapping[str, Sequence[float]]) -> dict[str, dict[str, int]]:
    """``result[a][b]`` = number of classes on which method a beats method b."""
    result: dict[str, dict[str, int]] = {}
    for a, ious_a in per_class.items():
        result[a] = {}
        for b, ious_b in per_class.items():
            if a == b:
                continue
            result[a][b] = sum(1 for x, y in zip(ious_a, ious_b, strict=True) if not math.isnan(x) and not math.isnan(y) and x > y)
    return result
