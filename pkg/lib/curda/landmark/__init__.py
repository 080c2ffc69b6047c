"""Superpixel SVM, confident-landmark selection and superpixel baselines."""

from curda.landmark.diagnostics import LandmarkDiagnostics, decile_accuracy, landmark_diagnostics, top_fraction_curve
from curda.landmark.pipeline import LandmarkResult, SuperpixelSettings, build_landmarks, segment_all, source_training_set
from curda.landmark.selection import (
    DEFAULT_RATIO,
    Landmark,
    LandmarkSet,
    ScoredImage,
    landmark_count,
    score_image,
    select_landmarks,
    superpixel_segmentation,
)
from curda.landmark.svm import SVMModel, classify_many, classify_sp, decision_values, train_sp_svm

__all__ = [
    "DEFAULT_RATIO",
    "Landmark",
    "LandmarkDiagnostics",
    "LandmarkResult",
    "LandmarkSet",
    "SVMModel",
    "ScoredImage",
    "SuperpixelSettings",
    "build_landmarks",
    "classify_many",
    "classify_sp",
    "decile_accuracy",
    "decision_values",
    "landmark_count",
    "landmark_diagnostics",
    "score_image",
    "segment_all",
    "select_landmarks",
    "source_training_set",
    "superpixel_segmentation",
    "top_fraction_curve",
    "train_sp_svm",
]
