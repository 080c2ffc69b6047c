"""Small numeric helpers shared by the models and estimators."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from curda.errors import DivergenceError

# Floor applied before every logarithm of a predicted probability.
LOG_CLAMP = 1e-8

# Label value for pixels that carry no class (skipped by evaluation).
IGNORE_INDEX = 255

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]


def softmax(logits: FloatArray, axis: int = -1) -> FloatArray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def clamped_log(values: FloatArray) -> FloatArray:
    return np.log(np.maximum(values, LOG_CLAMP))


def soft_cross_entropy(target: FloatArray, predicted: FloatArray) -> FloatArray:
    """-sum_c target_c log(max(predicted_c, LOG_CLAMP)) over the last axis."""
    return -(target * clamped_log(predicted)).sum(axis=-1)


def soft_cross_entropy_grad(target: FloatArray, predicted: FloatArray) -> FloatArray:
    """Derivative of ``soft_cross_entropy`` with respect to ``predicted``.

    The clamp is respected: entries below LOG_CLAMP receive zero gradient.
    """
    active = predicted >= LOG_CLAMP
    safe = np.where(active, predicted, 1.0)
    return np.where(active, -target / safe, 0.0)


def softmax_jvp(probs: FloatArray, grad_probs: FloatArray) -> FloatArray:
    """Pull a gradient on softmax outputs back onto the logits (last axis)."""
    inner = (grad_probs * probs).sum(axis=-1, keepdims=True)
    return probs * (grad_probs - inner)


def renormalize(values: FloatArray) -> FloatArray:
    """Clamp negatives to zero and l1-normalize along the last axis."""
    clipped = np.maximum(values, 0.0)
    return clipped / clipped.sum(axis=-1, keepdims=True)


def standardization(features: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Column means and standard deviations of (N, D) features; constant columns get std 1."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    return mean, np.where(std > 1e-12, std, 1.0)


def ensure_finite(stage: str, *arrays: FloatArray | float, step: int | None = None) -> None:
    """Raise DivergenceError if any value is NaN or infinite."""
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise DivergenceError(stage, step=step)
