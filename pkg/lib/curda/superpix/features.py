"""Contextual superpixel features: a local block for a superpixel and its four probed neighbours."""

from __future__ import annotations

import numpy as np

from curda.numerics import FloatArray
from curda.superpix.slic import SuperpixelMap

BLOCK_SIZE = 9
FEATURE_SIZE = 5 * BLOCK_SIZE
DEFAULT_PROBE_SCALE = 1.0

# (dx, dy) in the order self-block is followed by: left, right, above, below
PROBE_DIRECTIONS: tuple[tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))


def local_blocks(image: FloatArray, spmap: SuperpixelMap) -> FloatArray:
    """(count, 9) blocks: mean RGB, std RGB, centroid x and y in [0, 1], size fraction."""
    height, width = spmap.ids.shape
    if image.shape[:2] != (height, width):
        msg = f"image shape {image.shape[:2]} does not match superpixel map shape {(height, width)}"
        raise ValueError(msg)
    flat = spmap.ids.reshape(-1)
    pixels = image.reshape(-1, 3)
    sizes = spmap.sizes.astype(np.float64)
    blocks = np.zeros((spmap.count, BLOCK_SIZE))
    for channel in range(3):
        mean = np.bincount(flat, weights=pixels[:, channel], minlength=spmap.count) / sizes
        mean_sq = np.bincount(flat, weights=pixels[:, channel] ** 2, minlength=spmap.count) / sizes
        blocks[:, channel] = mean
        blocks[:, 3 + channel] = np.sqrt(np.maximum(mean_sq - mean**2, 0.0))
    blocks[:, 6] = spmap.centroids[:, 0] / max(width - 1, 1)
    blocks[:, 7] = spmap.centroids[:, 1] / max(height - 1, 1)
    blocks[:, 8] = sizes / flat.size
    return blocks


def probe_neighbours(spmap: SuperpixelMap, probe_scale: float = DEFAULT_PROBE_SCALE) -> np.ndarray:
    """(count, 4) ids of the superpixels under centroid + probe_scale * S * direction, clamped to the image."""
    height, width = spmap.ids.shape
    offset = probe_scale * spmap.step
    neighbours = np.zeros((spmap.count, len(PROBE_DIRECTIONS)), dtype=np.int64)
    for column, (dx, dy) in enumerate(PROBE_DIRECTIONS):
        xs = np.clip(np.rint(spmap.centroids[:, 0] + dx * offset), 0, width - 1).astype(np.int64)
        ys = np.clip(np.rint(spmap.centroids[:, 1] + dy * offset), 0, height - 1).astype(np.int64)
        neighbours[:, column] = spmap.ids[ys, xs]
    return neighbours


def superpixel_features(image: FloatArray, spmap: SuperpixelMap, probe_scale: float = DEFAULT_PROBE_SCALE) -> FloatArray:
    """
    (count, 45) features: the local block of each superpixel followed by the
    blocks of its left, right, above and below neighbours.

    A probe that lands back inside the superpixel itself reuses the self block.
    """
    blocks = local_blocks(image, spmap)
    neighbours = probe_neighbours(spmap, probe_scale)
    return np.concatenate([blocks, *(blocks[neighbours[:, column]] for column in range(neighbours.shape[1]))], axis=1)
