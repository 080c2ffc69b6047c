"""Label distributions, their distances, and global distribution estimators."""

from curda.labeldist.descriptors import DESCRIPTOR_SIZE, image_descriptor, image_descriptors
from curda.labeldist.distributions import (
    DEFAULT_K,
    chi2_distance,
    dist_cross_entropy,
    gt_label_distribution,
    one_hot_distribution,
    predicted_label_distribution,
)
from curda.labeldist.estimators import (
    ConstantEstimator,
    EstimatorKind,
    GlobalEstimator,
    LogisticEstimator,
    LREstimator,
    NearestNeighborEstimator,
    build_estimator,
    estimate_lr,
    estimate_nn,
    estimate_source_mean,
    estimate_uniform,
    fit_lr_estimator,
    lr_objective,
)

__all__ = [
    "DEFAULT_K",
    "DESCRIPTOR_SIZE",
    "ConstantEstimator",
    "EstimatorKind",
    "GlobalEstimator",
    "LREstimator",
    "LogisticEstimator",
    "NearestNeighborEstimator",
    "build_estimator",
    "chi2_distance",
    "dist_cross_entropy",
    "estimate_lr",
    "estimate_nn",
    "estimate_source_mean",
    "estimate_uniform",
    "fit_lr_estimator",
    "gt_label_distribution",
    "image_descriptor",
    "image_descriptors",
    "lr_objective",
    "one_hot_distribution",
    "predicted_label_distribution",
]
