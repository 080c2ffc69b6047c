"""Segmentation scores, estimator reports and late fusion."""

from curda.evaluation.fusion import Pick, classwise_selection, fuse_all, late_fuse
from curda.evaluation.metrics import (
    ConfusionMatrix,
    IoUReport,
    class_fraction,
    confusion_matrix,
    evaluate_masks,
    iou_report,
    save_confusion_csv,
)
from curda.evaluation.reports import Chi2Row, chi2_report, pairwise_wins, save_chi2_csv, win_matrix

__all__ = [
    "Chi2Row",
    "ConfusionMatrix",
    "IoUReport",
    "Pick",
    "chi2_report",
    "class_fraction",
    "classwise_selection",
    "confusion_matrix",
    "evaluate_masks",
    "fuse_all",
    "iou_report",
    "late_fuse",
    "pairwise_wins",
    "save_chi2_csv",
    "save_confusion_csv",
    "win_matrix",
]
