"""Fixed 88-D global image descriptor used by the label-distribution estimators."""

from __future__ import annotations

import numpy as np

from curda.numerics import FloatArray

HIST_BINS = 8
POOL_CELLS = 8
DESCRIPTOR_SIZE = 3 * HIST_BINS + POOL_CELLS * POOL_CELLS

# ITU-R BT.601 luma weights.
_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _channel_histograms(image: FloatArray) -> FloatArray:
    pixels = image.reshape(-1, 3)
    bins = np.minimum(np.floor(pixels * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    bins = np.maximum(bins, 0)
    blocks = [np.bincount(bins[:, channel], minlength=HIST_BINS) / pixels.shape[0] for channel in range(3)]
    return np.concatenate(blocks).astype(np.float64)


def _pooled_gray(image: FloatArray) -> FloatArray:
    height, width = image.shape[:2]
    gray = image @ _GRAY_WEIGHTS
    row_cell = (np.arange(height) * POOL_CELLS) // height
    col_cell = (np.arange(width) * POOL_CELLS) // width
    cell = (row_cell[:, None] * POOL_CELLS + col_cell[None, :]).reshape(-1)
    sums = np.bincount(cell, weights=gray.reshape(-1), minlength=POOL_CELLS * POOL_CELLS)
    sizes = np.bincount(cell, minlength=POOL_CELLS * POOL_CELLS)
    return sums / np.maximum(sizes, 1)


def image_descriptor(image: FloatArray) -> FloatArray:
    """Three 8-bin per-channel histograms followed by row-major 8x8 mean-pooled gray."""
    if image.ndim != 3 or image.shape[2] != 3:
        msg = f"expected an (H, W, 3) image, got shape {image.shape}"
        raise ValueError(msg)
    return np.concatenate([_channel_histograms(image), _pooled_gray(image)])


def image_descriptors(images: list[FloatArray]) -> FloatArray:
    return np.stack([image_descriptor(image) for image in images])
