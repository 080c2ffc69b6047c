"""Estimators of a target image's global label distribution, trained on the source domain."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Protocol

import numpy as np

from curda.errors import DivergenceError
from curda.io import load_bundle, save_bundle
from curda.labeldist.descriptors import DESCRIPTOR_SIZE, image_descriptor
from curda.numerics import FloatArray, renormalize, soft_cross_entropy, softmax, standardization
from curda.rng import SplitMix64

logger = logging.getLogger(__name__)

DEFAULT_LR_EPOCHS = 2000
DEFAULT_LR_RATE = 0.05
DEFAULT_NN_K = 5


class EstimatorKind(StrEnum):
    LR = "lr"
    NN = "nn"
    MEAN = "mean"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class LREstimator:
    """Multinomial logistic regression trained on soft (distribution) targets.

    Descriptors are standardized with the source ``mean`` and ``std`` before
    the linear layer.
    """

    weights: FloatArray
    bias: FloatArray
    mean: FloatArray
    std: FloatArray

    @classmethod
    def unscaled(cls, weights: FloatArray, bias: FloatArray) -> LREstimator:
        """An estimator applied to raw descriptors (zero mean, unit std)."""
        return cls(weights=weights, bias=bias, mean=np.zeros(weights.shape[0]), std=np.ones(weights.shape[0]))

    @property
    def num_classes(self) -> int:
        return int(self.bias.shape[0])

    def predict(self, descriptors: FloatArray) -> FloatArray:
        """(N, C) distributions for (N, D) descriptors, or (C,) for a single (D,) descriptor."""
        return softmax(((descriptors - self.mean) / self.std) @ self.weights + self.bias)

    def save(self, path: Path) -> Path:
        return save_bundle(path, {"WGHT": self.weights, "BIAS": self.bias, "MEAN": self.mean, "STDV": self.std})

    @classmethod
    def load(cls, path: Path) -> LREstimator:
        sections = load_bundle(path)
        return cls(
            weights=np.asarray(sections["WGHT"], dtype=np.float64),
            bias=np.asarray(sections["BIAS"], dtype=np.float64),
            mean=np.asarray(sections["MEAN"], dtype=np.float64),
            std=np.asarray(sections["STDV"], dtype=np.float64),
        )


def lr_objective(weights: FloatArray, bias: FloatArray, descriptors: FloatArray, targets: FloatArray) -> tuple[float, FloatArray, FloatArray]:
    """Mean soft cross-entropy of the LR outputs and its gradient."""
    probs = softmax(descriptors @ weights + bias)
    loss = float(soft_cross_entropy(targets, probs).mean())
    # Exact for probabilities above the log clamp, which holds for softmax outputs in practice.
    delta = (probs * targets.sum(axis=1, keepdims=True) - targets) / descriptors.shape[0]
    return loss, descriptors.T @ delta, delta.sum(axis=0)


def fit_lr_estimator(
    descriptors: FloatArray,
    targets: FloatArray,
    epochs: int = DEFAULT_LR_EPOCHS,
    lr_rate: float = DEFAULT_LR_RATE,
    seed: int = 0,
    *,
    init_scale: float = 0.0,
    loss_trace: list[float] | None = None,
) -> LREstimator:
    """
    Fit logistic regression by full-batch gradient descent.

    Each descriptor dimension is standardized with the source statistics
    first, so one step size suits histogram bins and pooled intensities alike.

    Args:
        descriptors: (N, D) image descriptors.
        targets: (N, C) ground-truth label distributions.
        epochs: Number of full-batch steps.
        lr_rate: Step size.
        seed: Seeds the initial weights when ``init_scale`` is positive; the
            default zero initialization consumes no randomness.
        init_scale: Standard deviation of the initial weights.
        loss_trace: If given, receives the objective before every step.

    Raises:
        DivergenceError: if the objective becomes non-finite.
    """
    if descriptors.shape[0] == 0 or descriptors.shape[0] != targets.shape[0]:
        msg = f"need equally many descriptors and targets, got {descriptors.shape[0]} and {targets.shape[0]}"
        raise ValueError(msg)
    mean, std = standardization(descriptors)
    scaled = (descriptors - mean) / std
    dims, num_classes = descriptors.shape[1], targets.shape[1]
    weights = np.zeros((dims, num_classes))
    if init_scale > 0:
        weights = init_scale * SplitMix64(seed).normal(dims * num_classes).reshape(dims, num_classes)
    bias = np.zeros(num_classes)
    for epoch in range(epochs):
        loss, grad_w, grad_b = lr_objective(weights, bias, scaled, targets)
        if not np.isfinite(loss):
            raise DivergenceError("logistic-regression fit", step=epoch, components={"loss": loss})
        if loss_trace is not None:
            loss_trace.append(loss)
        weights = weights - lr_rate * grad_w
        bias = bias - lr_rate * grad_b
    logger.debug("LR estimator fitted: %d images, %d epochs", descriptors.shape[0], epochs)
    return LREstimator(weights=weights, bias=bias, mean=mean, std=std)


def estimate_lr(estimator: LREstimator, image: FloatArray) -> FloatArray:
    """softmax(standardized descriptor @ W + b)."""
    return estimator.predict(image_descriptor(image))


def estimate_nn(source_descriptors: FloatArray, source_dists: FloatArray, image: FloatArray, k: int = DEFAULT_NN_K) -> FloatArray:
    """Mean label distribution of the ``k`` l2-nearest source images (ties go to the lower index)."""
    if source_descriptors.shape[0] == 0:
        msg = "nearest-neighbor estimation needs at least one source image"
        raise ValueError(msg)
    if not 1 <= k <= source_descriptors.shape[0]:
        msg = f"k must lie in [1, {source_descriptors.shape[0]}], got {k}"
        raise ValueError(msg)
    query = image_descriptor(image) if image.ndim == 3 else image
    distances = np.sqrt(((source_descriptors - query) ** 2).sum(axis=1))
    nearest = np.argsort(distances, kind="stable")[:k]
    return renormalize(source_dists[nearest].mean(axis=0))


def estimate_source_mean(source_dists: FloatArray) -> FloatArray:
    if source_dists.shape[0] == 0:
        msg = "source mean needs at least one distribution"
        raise ValueError(msg)
    return renormalize(source_dists.mean(axis=0))


def estimate_uniform(num_classes: int) -> FloatArray:
    if num_classes < 1:
        msg = f"num_classes must be >= 1, got {num_classes}"
        raise ValueError(msg)
    return np.full(num_classes, 1.0 / num_classes)


class GlobalEstimator(Protocol):
    """Anything that maps a target image to a label distribution."""

    name: str

    def estimate(self, image: FloatArray) -> FloatArray: ...


@dataclass(frozen=True)
class LogisticEstimator:
    model: LREstimator
    name: str = "lr"

    def estimate(self, image: FloatArray) -> FloatArray:
        return estimate_lr(self.model, image)


@dataclass(frozen=True)
class NearestNeighborEstimator:
    descriptors: FloatArray
    dists: FloatArray
    k: int = DEFAULT_NN_K
    name: str = "nn"

    def estimate(self, image: FloatArray) -> FloatArray:
        return estimate_nn(self.descriptors, self.dists, image, self.k)


@dataclass(frozen=True)
class ConstantEstimator:
    """Returns the same distribution for every image (source mean, uniform)."""

    dist: FloatArray
    name: str

    def estimate(self, image: FloatArray) -> FloatArray:
        return self.dist.copy()


def build_estimator(
    kind: EstimatorKind | str,
    source_descriptors: FloatArray,
    source_dists: FloatArray,
    *,
    nn_k: int = DEFAULT_NN_K,
    lr_epochs: int = DEFAULT_LR_EPOCHS,
    lr_rate: float = DEFAULT_LR_RATE,
    seed: int = 0,
) -> GlobalEstimator:
    """Fit or assemble the estimator named by ``kind`` from source data."""
    if source_descriptors.shape[1] != DESCRIPTOR_SIZE:
        msg = f"expected {DESCRIPTOR_SIZE}-D descriptors, got {source_descriptors.shape[1]}"
        raise ValueError(msg)
    match EstimatorKind(kind):
        case EstimatorKind.LR:
            return LogisticEstimator(fit_lr_estimator(source_descriptors, source_dists, lr_epochs, lr_rate, seed))
        case EstimatorKind.NN:
            return NearestNeighborEstimator(source_descriptors, source_dists, min(nn_k, source_descriptors.shape[0]))
        case EstimatorKind.MEAN:
            return ConstantEstimator(estimate_source_mean(source_dists), name="mean")
        case EstimatorKind.UNIFORM:
            return ConstantEstimator(estimate_uniform(source_dists.shape[1]), name="uniform")
