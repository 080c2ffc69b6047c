"""Two 3x3 convolutions and a 1x1 head with a per-pixel softmax.

All arrays are float64. Convolutions use "same" padding by edge replication
and are computed as patch matrices (im2col) times reshaped kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from curda.errors import DivergenceError
from curda.numerics import LOG_CLAMP, FloatArray, IntArray, softmax
from curda.rng import SplitMix64

DEFAULT_FEATURES = 8


@dataclass(frozen=True)
class ModelParams:
    """Network weights stored as one flat vector.

    Layout: conv1 kernel (3, 3, 3, F), conv1 bias (F), conv2 kernel (3, 3, F, F),
    conv2 bias (F), head kernel (F, C), head bias (C).
    """

    features: int
    classes: int
    vector: FloatArray

    def __post_init__(self) -> None:
        expected = parameter_count(self.features, self.classes)
        if self.vector.shape != (expected,):
            msg = f"expected a flat vector of {expected} parameters for F={self.features}, C={self.classes}, got shape {self.vector.shape}"
            raise ValueError(msg)

    def _slice(self, index: int) -> FloatArray:
        start, stop, shape = _layout(self.features, self.classes)[index]
        return self.vector[start:stop].reshape(shape)

    @property
    def conv1_w(self) -> FloatArray:
        return self._slice(0)

    @property
    def conv1_b(self) -> FloatArray:
        return self._slice(1)

    @property
    def conv2_w(self) -> FloatArray:
        return self._slice(2)

    @property
    def conv2_b(self) -> FloatArray:
        return self._slice(3)

    @property
    def head_w(self) -> FloatArray:
        return self._slice(4)

    @property
    def head_b(self) -> FloatArray:
        return self._slice(5)

    def with_vector(self, vector: FloatArray) -> ModelParams:
        return ModelParams(self.features, self.classes, vector)


def _layout(features: int, classes: int) -> list[tuple[int, int, tuple[int, ...]]]:
    shapes: list[tuple[int, ...]] = [
        (3, 3, 3, features),
        (features,),
        (3, 3, features, features),
        (features,),
        (features, classes),
        (classes,),
    ]
    layout: list[tuple[int, int, tuple[int, ...]]] = []
    offset = 0
    for shape in shapes:
        size = math.prod(shape)
        layout.append((offset, offset + size, shape))
        offset += size
    return layout


def parameter_count(features: int, classes: int) -> int:
    return _layout(features, classes)[-1][1]


def pack_parameters(parts: list[FloatArray]) -> FloatArray:
    return np.concatenate([part.reshape(-1) for part in parts]).astype(np.float64)


def init_model(features: int, classes: int, seed: int) -> ModelParams:
    """He-normal kernels (std sqrt(2 / fan_in)), zero biases."""
    if features < 1 or classes < 2:
        msg = f"need F >= 1 and C >= 2, got F={features}, C={classes}"
        raise ValueError(msg)
    rng = SplitMix64(seed)
    parts: list[FloatArray] = []
    for _start, _stop, shape in _layout(features, classes):
        if len(shape) == 1:
            parts.append(np.zeros(shape))
            continue
        fan_in = math.prod(shape[:-1])
        parts.append(rng.normal(math.prod(shape)).reshape(shape) * math.sqrt(2.0 / fan_in))
    return ModelParams(features, classes, pack_parameters(parts))


def zero_model(features: int, classes: int) -> ModelParams:
    return ModelParams(features, classes, np.zeros(parameter_count(features, classes)))


def image_patches(x: FloatArray) -> FloatArray:
    """(H, W, Cin) -> (H*W, 9*Cin) 3x3 neighbourhoods with edge replication, ordered (dy, dx, cin)."""
    height, width, channels = x.shape
    padded = np.pad(x, ((1, 1), (1, 1), (0, 0)), mode="edge")
    cols = [padded[dy : dy + height, dx : dx + width, :] for dy in range(3) for dx in range(3)]
    return np.concatenate(cols, axis=-1).reshape(height * width, 9 * channels)


def fold_patch_grad(dpatches: FloatArray, height: int, width: int, channels: int) -> FloatArray:
    """Adjoint of ``image_patches``: scatter patch gradients back onto the input."""
    grad_patches = dpatches.reshape(height, width, 3, 3, channels)
    padded = np.zeros((height + 2, width + 2, channels))
    for dy in range(3):
        for dx in range(3):
            padded[dy : dy + height, dx : dx + width, :] += grad_patches[:, :, dy, dx, :]
    grad = padded[1:-1, 1:-1, :].copy()
    # replicated borders route back to the edge pixels they copied
    grad[0, :, :] += padded[0, 1:-1, :]
    grad[-1, :, :] += padded[-1, 1:-1, :]
    grad[:, 0, :] += padded[1:-1, 0, :]
    grad[:, -1, :] += padded[1:-1, -1, :]
    grad[0, 0, :] += padded[0, 0, :]
    grad[0, -1, :] += padded[0, -1, :]
    grad[-1, 0, :] += padded[-1, 0, :]
    grad[-1, -1, :] += padded[-1, -1, :]
    return grad


@dataclass(frozen=True)
class ForwardCache:
    """Intermediates of one forward pass, rows indexed by flat pixel."""

    height: int
    width: int
    patches1: FloatArray
    z1: FloatArray
    patches2: FloatArray
    z2: FloatArray
    a2: FloatArray
    logits: FloatArray
    probs: FloatArray


def forward_cached(params: ModelParams, image: FloatArray) -> ForwardCache:
    if image.ndim != 3 or image.shape[2] != 3:
        msg = f"expected an (H, W, 3) image, got shape {image.shape}"
        raise ValueError(msg)
    height, width = image.shape[:2]
    f = params.features
    patches1 = image_patches(image)
    z1 = patches1 @ params.conv1_w.reshape(27, f) + params.conv1_b
    a1 = np.maximum(z1, 0.0)
    patches2 = image_patches(a1.reshape(height, width, f))
    z2 = patches2 @ params.conv2_w.reshape(9 * f, f) + params.conv2_b
    a2 = np.maximum(z2, 0.0)
    logits = a2 @ params.head_w + params.head_b
    if not np.all(np.isfinite(logits)):
        raise DivergenceError("forward pass")
    probs = softmax(logits)
    return ForwardCache(height, width, patches1, z1, patches2, z2, a2, logits, probs)


def forward(params: ModelParams, image: FloatArray) -> FloatArray:
    """Per-pixel class probabilities, shape (H, W, C)."""
    cache = forward_cached(params, image)
    return cache.probs.reshape(cache.height, cache.width, params.classes)


def backward_from_logits(params: ModelParams, cache: ForwardCache, dlogits: FloatArray) -> FloatArray:
    """Gradient of a scalar loss w.r.t. the flat parameter vector, given d loss / d logits (HW, C)."""
    f = params.features
    grad_head_w = cache.a2.T @ dlogits
    grad_head_b = dlogits.sum(axis=0)
    dz2 = (dlogits @ params.head_w.T) * (cache.z2 > 0)
    grad_conv2_w = cache.patches2.T @ dz2
    grad_conv2_b = dz2.sum(axis=0)
    dpatches2 = dz2 @ params.conv2_w.reshape(9 * f, f).T
    da1 = fold_patch_grad(dpatches2, cache.height, cache.width, f).reshape(-1, f)
    dz1 = da1 * (cache.z1 > 0)
    grad_conv1_w = cache.patches1.T @ dz1
    grad_conv1_b = dz1.sum(axis=0)
    return pack_parameters([grad_conv1_w, grad_conv1_b, grad_conv2_w, grad_conv2_b, grad_head_w, grad_head_b])


def pixel_ce_loss(pred: FloatArray, mask: IntArray) -> float:
    """-(1/HW) sum log pred[i, j, mask[i, j]] with the log clamp."""
    num_classes = pred.shape[-1]
    if pred.shape[:-1] != mask.shape:
        msg = f"prediction shape {pred.shape[:-1]} does not match mask shape {mask.shape}"
        raise ValueError(msg)
    flat_mask = mask.reshape(-1)
    if flat_mask.size and (flat_mask.min() < 0 or flat_mask.max() >= num_classes):
        msg = f"mask contains class ids outside [0, {num_classes})"
        raise ValueError(msg)
    picked = pred.reshape(-1, num_classes)[np.arange(flat_mask.size), flat_mask]
    return float(-np.log(np.maximum(picked, LOG_CLAMP)).mean())


def predict_mask(params: ModelParams, image: FloatArray) -> IntArray:
    """Arg-max class per pixel (lowest class id on ties)."""
    return forward(params, image).argmax(axis=-1).astype(np.int64)


def predict_masks(params: ModelParams, images: list[FloatArray]) -> list[IntArray]:
    return [predict_mask(params, image) for image in images]
