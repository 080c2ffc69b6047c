"""Class-wise late fusion of two models' predictions."""

from __future__ import annotations

from collections.abc import Sequence
from enum import StrEnum

import numpy as np

from curda.evaluation.metrics import evaluate_masks
from curda.numerics import IntArray


class Pick(StrEnum):
    A = "A"
    B = "B"


def classwise_selection(preds_a: Sequence[IntArray], preds_b: Sequence[IntArray], gts: Sequence[IntArray], num_classes: int) -> dict[int, Pick]:
    """For every class, the model with the higher validation IoU; ties and undefined IoUs go to A."""
    _, report_a = evaluate_masks(preds_a, gts, num_classes)
    _, report_b = evaluate_masks(preds_b, gts, num_classes)
    selection: dict[int, Pick] = {}
    for class_id, (iou_a, iou_b) in enumerate(zip(report_a.per_class, report_b.per_class, strict=True)):
        a = -1.0 if np.isnan(iou_a) else iou_a
        b = -1.0 if np.isnan(iou_b) else iou_b
        selection[class_id] = Pick.B if b > a else Pick.A
    return selection


def late_fuse(mask_a: IntArray, mask_b: IntArray, selection: dict[int, Pick]) -> IntArray:
    """A's label where A predicts an A-selected class, B's label everywhere else."""
    if mask_a.shape != mask_b.shape:
        msg = f"mask shapes differ: {mask_a.shape} vs {mask_b.shape}"
        raise ValueError(msg)
    a_classes = np.array([class_id for class_id, pick in selection.items() if pick is Pick.A], dtype=np.int64)
    keep_a = np.isin(mask_a, a_classes)
    return np.where(keep_a, mask_a, mask_b)


def fuse_all(preds_a: Sequence[IntArray], preds_b: Sequence[IntArray], selection: dict[int, Pick]) -> list[IntArray]:
    return [late_fuse(a, b, selection) for a, b in zip(preds_a, preds_b, strict=True)]
