"""Image- and region-level label distributions and the distances between them."""

from __future__ import annotations

import logging

import numpy as np

from curda.numerics import FloatArray, IntArray, renormalize, soft_cross_entropy

logger = logging.getLogger(__name__)

DEFAULT_K = 6.0
# K above this value gets a warning; summands underflow for all but the top class.
K_WARN_THRESHOLD = 30.0


def gt_label_distribution(mask: IntArray, num_classes: int) -> FloatArray:
    """Fraction of pixels per class."""
    flat = mask.reshape(-1)
    if flat.size and (flat.min() < 0 or flat.max() >= num_classes):
        msg = f"mask contains class ids outside [0, {num_classes})"
        raise ValueError(msg)
    counts = np.bincount(flat, minlength=num_classes).astype(np.float64)
    return counts / flat.size


def check_sharpening(k: float) -> None:
    if k < 1.0:
        msg = f"sharpening exponent K must be >= 1, got {k}"
        raise ValueError(msg)
    if k > K_WARN_THRESHOLD:
        logger.warning("Sharpening exponent K=%g is above %g; expect numerical instability", k, K_WARN_THRESHOLD)


def sharpened_summands(pred: FloatArray, k: float) -> FloatArray:
    """(pred / max_c pred) ** k per pixel; the per-pixel arg-max contributes exactly 1."""
    peak = pred.max(axis=-1, keepdims=True)
    return (pred / peak) ** k


def predicted_label_distribution(
    pred: FloatArray,
    k: float = DEFAULT_K,
    region: IntArray | None = None,
) -> FloatArray:
    """
    Sharpened label distribution of a soft prediction.

    Args:
        pred: (H, W, C) per-pixel class probabilities.
        k: Sharpening exponent.
        region: Optional flat pixel indices; defaults to the whole image.

    Returns:
        Length-C distribution, l1-normalized.
    """
    check_sharpening(k)
    flat = pred.reshape(-1, pred.shape[-1])
    if region is not None:
        if region.size == 0:
            msg = "region must contain at least one pixel"
            raise ValueError(msg)
        flat = flat[region]
    totals = sharpened_summands(flat, k).sum(axis=0)
    return renormalize(totals)


def dist_cross_entropy(p: FloatArray, p_hat: FloatArray) -> float:
    """C(p, p_hat) = H(p) + KL(p || p_hat) = -sum_c p_c log p_hat_c."""
    return float(soft_cross_entropy(p, p_hat))


def chi2_distance(p: FloatArray, q: FloatArray) -> float:
    """sum_c (p_c - q_c)^2 / (p_c + q_c), with 0/0 treated as 0. Symmetric, in [0, 2]."""
    total = p + q
    safe = np.where(total > 0, total, 1.0)
    return float(np.where(total > 0, (p - q) ** 2 / safe, 0.0).sum())


def one_hot_distribution(class_id: int, num_classes: int) -> FloatArray:
    dist = np.zeros(num_classes, dtype=np.float64)
    dist[class_id] = 1.0
    return dist
