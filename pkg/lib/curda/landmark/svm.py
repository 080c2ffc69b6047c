"""One-vs-rest linear SVMs trained with Pegasos mini-batch subgradient steps."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from curda.errors import DivergenceError
from curda.io import load_bundle, save_bundle
from curda.numerics import FloatArray, IntArray, standardization
from curda.rng import SplitMix64

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1e-3
DEFAULT_EPOCHS = 200
DEFAULT_BATCH = 64


@dataclass(frozen=True)
class SVMModel:
    """Per-class hyperplanes over standardized features.

    ``mean`` and ``std`` are the source feature statistics applied before the
    hyperplanes; constant features have ``std`` 1.
    """

    weights: FloatArray
    biases: FloatArray
    mean: FloatArray
    std: FloatArray
    lam: float
    epochs: int

    @property
    def num_classes(self) -> int:
        return int(self.biases.shape[0])

    def save(self, path: Path) -> Path:
        return save_bundle(
            path,
            {
                "WGHT": self.weights,
                "BIAS": self.biases,
                "MEAN": self.mean,
                "STDV": self.std,
                "HYPR": np.array([self.lam, float(self.epochs)]),
            },
        )

    @classmethod
    def load(cls, path: Path) -> SVMModel:
        sections = load_bundle(path)
        hyper = sections["HYPR"]
        return cls(
            weights=np.asarray(sections["WGHT"], dtype=np.float64),
            biases=np.asarray(sections["BIAS"], dtype=np.float64),
            mean=np.asarray(sections["MEAN"], dtype=np.float64),
            std=np.asarray(sections["STDV"], dtype=np.float64),
            lam=float(hyper[0]),
            epochs=int(hyper[1]),
        )


def train_sp_svm(
    features: FloatArray,
    labels: IntArray,
    num_classes: int,
    lam: float = DEFAULT_LAMBDA,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    *,
    batch: int = DEFAULT_BATCH,
) -> SVMModel:
    """
    Train ``num_classes`` one-vs-rest hinge-loss SVMs with Pegasos.

    Each epoch visits a seeded permutation of the points in mini-batches. At
    iteration t the step is 1 / (lam * t); the bias rides along as a constant
    feature and every step ends with the projection onto the ball of radius
    1 / sqrt(lam).

    Raises:
        ValueError: on empty input, mismatched lengths or labels outside [0, num_classes).
        DivergenceError: if the weights become non-finite.
    """
    count = features.shape[0]
    if count == 0 or count != labels.shape[0]:
        msg = f"need equally many features and labels, got {count} and {labels.shape[0]}"
        raise ValueError(msg)
    if labels.min() < 0 or labels.max() >= num_classes:
        msg = f"labels must lie in [0, {num_classes})"
        raise ValueError(msg)
    if lam <= 0 or epochs < 1 or batch < 1:
        msg = f"need lam > 0, epochs >= 1 and batch >= 1, got lam={lam}, epochs={epochs}, batch={batch}"
        raise ValueError(msg)
    present = np.bincount(labels, minlength=num_classes) > 0
    for class_id in np.flatnonzero(~present):
        logger.warning("Class %d has no training superpixels; its SVM only sees negatives", class_id)

    mean, std = standardization(features)
    augmented = np.concatenate([(features - mean) / std, np.ones((count, 1))], axis=1)
    targets = np.where(labels[:, None] == np.arange(num_classes)[None, :], 1.0, -1.0)
    planes = np.zeros((num_classes, augmented.shape[1]))
    radius = 1.0 / math.sqrt(lam)
    rng = SplitMix64(seed)
    t = 0
    for epoch in range(epochs):
        order = rng.permutation(count)
        for start in range(0, count, batch):
            t += 1
            chosen = order[start : start + batch]
            x, y = augmented[chosen], targets[chosen]
            violated = (y * (x @ planes.T)) < 1.0
            step = 1.0 / (lam * t)
            subgradient = ((violated * y).T @ x) / chosen.size
            planes = (1.0 - step * lam) * planes + step * subgradient
            norms = np.sqrt((planes**2).sum(axis=1, keepdims=True))
            planes = planes * np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        if not np.all(np.isfinite(planes)):
            raise DivergenceError("SVM training", step=epoch)
    logger.debug("Trained %d-class SVM on %d superpixels (%d iterations)", num_classes, count, t)
    return SVMModel(weights=planes[:, :-1].copy(), biases=planes[:, -1].copy(), mean=mean, std=std, lam=lam, epochs=epochs)


def decision_values(model: SVMModel, features: FloatArray) -> FloatArray:
    """(N, C) raw decision values w_c . standardized(x) + b_c."""
    standardized = (features - model.mean) / model.std
    return standardized @ model.weights.T + model.biases


def classify_decisions(values: FloatArray) -> tuple[IntArray, FloatArray]:
    """Arg-max class (lowest id on ties) and its decision value per row."""
    classes = values.argmax(axis=-1).astype(np.int64)
    return classes, np.take_along_axis(values, classes[..., None], axis=-1)[..., 0]


def classify_sp(model: SVMModel, feature: FloatArray) -> tuple[int, float]:
    """(class id, confidence) for one superpixel feature vector."""
    classes, confidences = classify_decisions(decision_values(model, feature[None, :]))
    return int(classes[0]), float(confidences[0])


def classify_many(model: SVMModel, features: FloatArray) -> tuple[IntArray, FloatArray]:
    return classify_decisions(decision_values(model, features))
