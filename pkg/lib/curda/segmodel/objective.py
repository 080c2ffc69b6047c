"""Composite training loss and its exact gradient.

A batch is a sequence of samples. Each sample may carry a weighted pixel-wise
cross-entropy against a dense mask and any number of weighted distribution
terms, each comparing a fixed target distribution with the sharpened predicted
distribution over a pixel region. The loss is linear in all weights.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from curda.errors import DivergenceError
from curda.numerics import LOG_CLAMP, FloatArray, IntArray, soft_cross_entropy, soft_cross_entropy_grad
from curda.segmodel.network import ForwardCache, ModelParams, backward_from_logits, forward_cached

SOURCE_TAG = "source"
IMAGE_TAG = "image"
SUPERPIXEL_TAG = "superpixel"


@dataclass(frozen=True)
class DistTerm:
    """weight * C(target, p_hat(region)); region holds flat pixel indices, None for the whole image."""

    target: FloatArray
    weight: float
    region: IntArray | None = None
    tag: str = IMAGE_TAG


@dataclass(frozen=True)
class Sample:
    image: FloatArray
    mask: IntArray | None = None
    ce_weight: float = 0.0
    terms: tuple[DistTerm, ...] = ()

    @property
    def is_active(self) -> bool:
        return self.ce_weight != 0.0 or any(term.weight != 0.0 for term in self.terms)


@dataclass
class ObjectiveResult:
    loss: float
    grad: FloatArray | None
    components: dict[str, float] = field(default_factory=dict[str, float])


def _ce_term(cache: ForwardCache, mask: IntArray) -> tuple[float, FloatArray]:
    """Mean pixel cross-entropy and its gradient w.r.t. the logits."""
    probs = cache.probs
    num_pixels, num_classes = probs.shape
    labels = mask.reshape(-1)
    if labels.min() < 0 or labels.max() >= num_classes:
        msg = f"mask contains class ids outside [0, {num_classes})"
        raise ValueError(msg)
    rows = np.arange(num_pixels)
    picked = probs[rows, labels]
    loss = float(-np.log(np.maximum(picked, LOG_CLAMP)).mean())
    dlogits = probs.copy()
    dlogits[rows, labels] -= 1.0
    dlogits[picked < LOG_CLAMP] = 0.0
    return loss, dlogits / num_pixels


def _dist_term(cache: ForwardCache, term: DistTerm, k: float) -> tuple[float, FloatArray, IntArray]:
    """C(target, p_hat) and its gradient w.r.t. the logits of the region's pixels.

    Uses Yhat_c / max Yhat = exp(z_c - z_max) for the softmax, so each summand
    is exp(k (z_c - z_max)) and the per-pixel arg-max contributes exactly 1.
    """
    logits = cache.logits
    region = np.arange(logits.shape[0]) if term.region is None else term.region
    z = logits[region]
    top = z.argmax(axis=1)
    summands = np.exp(k * (z - z[np.arange(z.shape[0]), top][:, None]))
    totals = summands.sum(axis=0)
    norm = totals.sum()
    p_hat = totals / norm
    loss = float(soft_cross_entropy(term.target, p_hat))
    grad_p_hat = soft_cross_entropy_grad(term.target, p_hat)
    grad_totals = (grad_p_hat - (grad_p_hat * p_hat).sum()) / norm
    grad_z = grad_totals[None, :] * k * summands
    grad_z[np.arange(z.shape[0]), top] -= grad_z.sum(axis=1)
    return loss, grad_z, region


def loss_and_grad(params: ModelParams, samples: Sequence[Sample], k: float, *, with_grad: bool = True) -> ObjectiveResult:
    """
    Evaluate the weighted composite loss over a batch.

    Per-sample gradients are reduced in batch order. Samples and terms with
    zero weight are skipped entirely.

    Returns:
        ObjectiveResult with the total loss, the flat gradient (or None), and
        the weighted loss per term tag.

    Raises:
        DivergenceError: if the loss or the gradient is non-finite.
    """
    total = 0.0
    components: dict[str, float] = {}
    grad = np.zeros_like(params.vector) if with_grad else None
    for sample in samples:
        if not sample.is_active:
            continue
        cache = forward_cached(params, sample.image)
        dlogits = np.zeros_like(cache.logits) if with_grad else None
        if sample.ce_weight != 0.0:
            if sample.mask is None:
                msg = "a sample with a cross-entropy weight needs a mask"
                raise ValueError(msg)
            loss, grad_ce = _ce_term(cache, sample.mask)
            total += sample.ce_weight * loss
            components[SOURCE_TAG] = components.get(SOURCE_TAG, 0.0) + sample.ce_weight * loss
            if dlogits is not None:
                dlogits += sample.ce_weight * grad_ce
        for term in sample.terms:
            if term.weight == 0.0:
                continue
            loss, grad_z, region = _dist_term(cache, term, k)
            total += term.weight * loss
            components[term.tag] = components.get(term.tag, 0.0) + term.weight * loss
            if dlogits is not None:
                dlogits[region] += term.weight * grad_z
        if grad is not None and dlogits is not None:
            grad += backward_from_logits(params, cache, dlogits)
    if not np.isfinite(total) or (grad is not None and not np.all(np.isfinite(grad))):
        raise DivergenceError("composite objective", components=components)
    return ObjectiveResult(loss=total, grad=grad, components=components)


def backward(params: ModelParams, samples: Sequence[Sample], k: float) -> FloatArray:
    """Exact gradient of the composite loss w.r.t. the flat parameter vector."""
    result = loss_and_grad(params, samples, k)
    assert result.grad is not None
    return result.grad
