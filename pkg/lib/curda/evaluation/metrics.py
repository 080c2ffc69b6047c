"""Confusion matrices and intersection-over-union."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from curda.numerics import IGNORE_INDEX, FloatArray, IntArray


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[g, p]`` = pixels with ground truth g predicted as p."""

    counts: IntArray

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: ConfusionMatrix) -> ConfusionMatrix:
        return ConfusionMatrix(self.counts + other.counts)

    def normalized(self) -> FloatArray:
        """Row-normalized counts; rows without ground-truth pixels stay zero."""
        rows = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        return np.divide(self.counts, rows, out=np.zeros(self.counts.shape), where=rows > 0)


def confusion_matrix(pred_masks: Sequence[IntArray], gt_masks: Sequence[IntArray], num_classes: int) -> ConfusionMatrix:
    """
    Count (ground truth, prediction) pairs over all pixels of all images.

    Pixels whose ground truth or prediction equals the ignore label are skipped.

    Raises:
        ValueError: on mismatched shapes or class ids outside [0, num_classes).
    """
    if len(pred_masks) != len(gt_masks):
        msg = f"got {len(pred_masks)} predictions for {len(gt_masks)} ground-truth masks"
        raise ValueError(msg)
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    for pred, gt in zip(pred_masks, gt_masks, strict=True):
        if pred.shape != gt.shape:
            msg = f"prediction shape {pred.shape} does not match ground-truth shape {gt.shape}"
            raise ValueError(msg)
        p = pred.reshape(-1).astype(np.int64)
        g = gt.reshape(-1).astype(np.int64)
        keep = (p != IGNORE_INDEX) & (g != IGNORE_INDEX)
        p, g = p[keep], g[keep]
        if p.size and (min(p.min(), g.min()) < 0 or max(p.max(), g.max()) >= num_classes):
            msg = f"class ids must lie in [0, {num_classes})"
            raise ValueError(msg)
        counts += np.bincount(g * num_classes + p, minlength=num_classes * num_classes).reshape(num_classes, num_classes)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class IoUReport:
    """Per-class IoU (NaN where TP + FP + FN = 0) and the mean over defined classes."""

    per_class: list[float]
    miou: float

    @property
    def defined(self) -> list[bool]:
        return [not math.isnan(value) for value in self.per_class]

    def to_dict(self, class_names: Sequence[str] | None = None) -> dict[str, Any]:
        names = list(class_names) if class_names is not None else [str(c) for c in range(len(self.per_class))]
        return {"miou": _json_float(self.miou), "per_class": {name: _json_float(value) for name, value in zip(names, self.per_class, strict=True)}}


def _json_float(value: float) -> float | None:
    return None if math.isnan(value) else value


def iou_report(cm: ConfusionMatrix) -> IoUReport:
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    denominator = tp + fp + fn
    per_class = [float(t / d) if d > 0 else float("nan") for t, d in zip(tp, denominator, strict=True)]
    defined = [value for value in per_class if not math.isnan(value)]
    miou = float(np.mean(defined)) if defined else float("nan")
    return IoUReport(per_class=per_class, miou=miou)


def evaluate_masks(pred_masks: Sequence[IntArray], gt_masks: Sequence[IntArray], num_classes: int) -> tuple[ConfusionMatrix, IoUReport]:
    cm = confusion_matrix(pred_masks, gt_masks, num_classes)
    return cm, iou_report(cm)


def class_fraction(masks: Sequence[IntArray], class_id: int) -> float:
    """Fraction of non-ignored pixels labeled ``class_id``."""
    flat = np.concatenate([mask.reshape(-1) for mask in masks])
    valid = flat[flat != IGNORE_INDEX]
    return float((valid == class_id).mean()) if valid.size else float("nan")


def save_confusion_csv(path: Path, cm: ConfusionMatrix, class_names: Sequence[str], *, normalized: bool = False) -> Path:
    """Long-format CSV (gt, pred, value) for plotting."""
    values = cm.normalized() if normalized else cm.counts
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["gt", "pred", "value"])
        for g, gt_name in enumerate(class_names):
            for p, pred_name in enumerate(class_names):
                writer.writerow([gt_name, pred_name, repr(float(values[g, p])) if normalized else int(values[g, p])])
    return path
