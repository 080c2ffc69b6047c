"""SLIC-style oversegmentation: local k-means in (color, position) space.

Colors are RGB scaled to [0, 100]. Cluster centers start on a regular grid of
step S = sqrt(HW / n) and each center only competes for pixels inside a 2S
window. After the k-means iterations, every superpixel keeps its largest
4-connected component; the other components are merged into the neighbouring
superpixel with which they share the longest boundary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from curda.numerics import FloatArray, IntArray

logger = logging.getLogger(__name__)

DEFAULT_SUPERPIXELS = 100
DEFAULT_COMPACTNESS = 10.0
DEFAULT_ITERATIONS = 10
COLOR_SCALE = 100.0

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class SuperpixelMap:
    """A partition of the image into ``count`` 4-connected superpixels.

    ``centroids`` holds (x, y) pixel means; ``step`` is the grid step S.
    """

    ids: IntArray
    count: int
    centroids: FloatArray
    sizes: IntArray
    step: float

    def region(self, sp_id: int) -> IntArray:
        """Flat pixel indices of one superpixel."""
        return np.flatnonzero(self.ids.reshape(-1) == sp_id)

    def regions(self) -> list[IntArray]:
        """Flat pixel indices of every superpixel, by id."""
        flat = self.ids.reshape(-1)
        order = np.argsort(flat, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return [np.asarray(part, dtype=np.int64) for part in np.split(order, bounds)]


def _grid_centers(height: int, width: int, n: int) -> tuple[FloatArray, float]:
    step = math.sqrt(height * width / n)
    rows = max(1, round(height / step))
    cols = max(1, round(width / step))
    ys = (np.arange(rows) + 0.5) * (height / rows) - 0.5
    xs = (np.arange(cols) + 0.5) * (width / cols) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([grid_y.reshape(-1), grid_x.reshape(-1)], axis=1), step


def _assign(lab: FloatArray, centers: FloatArray, colors: FloatArray, step: float, compactness: float) -> IntArray:
    height, width = lab.shape[:2]
    labels = np.full((height, width), -1, dtype=np.int64)
    best = np.full((height, width), np.inf)
    window = math.ceil(2 * step)
    spatial_weight = (compactness / step) ** 2
    for index in range(centers.shape[0]):
        cy, cx = centers[index]
        y0, y1 = max(0, math.floor(cy) - window), min(height, math.ceil(cy) + window + 1)
        x0, x1 = max(0, math.floor(cx) - window), min(width, math.ceil(cx) + window + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        ys = np.arange(y0, y1)[:, None]
        xs = np.arange(x0, x1)[None, :]
        color_d2 = ((lab[y0:y1, x0:x1] - colors[index]) ** 2).sum(axis=-1)
        space_d2 = (ys - cy) ** 2 + (xs - cx) ** 2
        distance = color_d2 + spatial_weight * space_d2
        region_best = best[y0:y1, x0:x1]
        closer = distance < region_best
        region_best[closer] = distance[closer]
        labels[y0:y1, x0:x1][closer] = index
    return labels


def _update(lab: FloatArray, labels: IntArray, num_clusters: int, centers: FloatArray, colors: FloatArray) -> tuple[FloatArray, FloatArray]:
    width = labels.shape[1]
    flat = labels.reshape(-1)
    valid = flat >= 0
    ids = flat[valid]
    counts = np.bincount(ids, minlength=num_clusters).astype(np.float64)
    rows, cols = np.divmod(np.flatnonzero(valid), width)
    occupied = counts > 0
    new_centers = centers.copy()
    new_colors = colors.copy()
    new_centers[occupied, 0] = np.bincount(ids, weights=rows, minlength=num_clusters)[occupied] / counts[occupied]
    new_centers[occupied, 1] = np.bincount(ids, weights=cols, minlength=num_clusters)[occupied] / counts[occupied]
    pixels = lab.reshape(-1, 3)[valid]
    for channel in range(3):
        sums = np.bincount(ids, weights=pixels[:, channel], minlength=num_clusters)
        new_colors[occupied, channel] = sums[occupied] / counts[occupied]
    return new_centers, new_colors


def _neighbour_boundary_counts(labels: IntArray, component: IntArray) -> dict[int, int]:
    """Shared 4-neighbour edge counts between a component's pixels and settled pixels outside it."""
    height, width = labels.shape
    ys, xs = component // width, component % width
    counts: dict[int, int] = {}
    own = labels[ys[0], xs[0]]
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ny, nx = ys + dy, xs + dx
        inside = (ny >= 0) & (ny < height) & (nx >= 0) & (nx < width)
        neighbours = labels[ny[inside], nx[inside]]
        for label in neighbours[(neighbours >= 0) & (neighbours != own)]:
            counts[int(label)] = counts.get(int(label), 0) + 1
    return counts


def enforce_connectivity(labels: IntArray) -> IntArray:
    """Keep each label's largest 4-connected component; merge the rest into neighbours."""
    result = labels.copy()
    orphans: list[IntArray] = []
    for label in np.unique(labels):
        components, num = ndimage.label(labels == label, structure=_FOUR_CONNECTED)
        if num <= 1:
            continue
        sizes = np.bincount(components.reshape(-1))[1:]
        keep = int(np.argmax(sizes)) + 1
        for part in range(1, num + 1):
            if part != keep:
                orphans.append(np.flatnonzero(components.reshape(-1) == part))
    if not orphans:
        return result
    flat = result.reshape(-1)
    # orphan pixels stay at -1 until merged
    pending = sorted(orphans, key=lambda pixels: int(pixels[0]))
    for pixels in pending:
        flat[pixels] = -1
    while pending:
        deferred: list[IntArray] = []
        for pixels in pending:
            counts = _neighbour_boundary_counts(result, pixels)
            if not counts:
                deferred.append(pixels)
                continue
            # longest shared boundary, lowest label on ties
            target = min(counts, key=lambda label: (-counts[label], label))
            flat[pixels] = target
        if len(deferred) == len(pending):
            msg = "connectivity enforcement could not settle isolated components"
            raise RuntimeError(msg)
        pending = deferred
    return result


def relabel_sequential(labels: IntArray) -> tuple[IntArray, int]:
    """Renumber labels 0..count-1 in raster order of first appearance."""
    flat = labels.reshape(-1)
    _, first = np.unique(flat, return_index=True)
    order = flat[np.sort(first)]
    mapping = np.full(int(flat.max()) + 1, -1, dtype=np.int64)
    mapping[order] = np.arange(order.size)
    return mapping[labels], int(order.size)


def build_superpixel_map(ids: IntArray, step: float) -> SuperpixelMap:
    height, width = ids.shape
    count = int(ids.max()) + 1
    flat = ids.reshape(-1)
    sizes = np.bincount(flat, minlength=count)
    rows, cols = np.divmod(np.arange(flat.size), width)
    cy = np.bincount(flat, weights=rows, minlength=count) / sizes
    cx = np.bincount(flat, weights=cols, minlength=count) / sizes
    return SuperpixelMap(ids=ids, count=count, centroids=np.stack([cx, cy], axis=1), sizes=sizes.astype(np.int64), step=step)


def slic_segment(
    image: FloatArray,
    n: int = DEFAULT_SUPERPIXELS,
    compactness: float = DEFAULT_COMPACTNESS,
    iters: int = DEFAULT_ITERATIONS,
) -> SuperpixelMap:
    """
    Oversegment ``image`` into roughly ``n`` connected superpixels.

    Raises:
        ValueError: if n < 4, n exceeds the pixel count, iters < 1 or compactness <= 0.
    """
    height, width = image.shape[:2]
    if n < 4:
        msg = f"n must be at least 4, got {n}"
        raise ValueError(msg)
    if n > height * width:
        msg = f"n={n} exceeds the number of pixels ({height * width})"
        raise ValueError(msg)
    if iters < 1 or compactness <= 0:
        msg = f"need iters >= 1 and compactness > 0, got iters={iters}, compactness={compactness}"
        raise ValueError(msg)
    lab = image * COLOR_SCALE
    centers, step = _grid_centers(height, width, n)
    sample_y = np.clip(np.rint(centers[:, 0]).astype(np.int64), 0, height - 1)
    sample_x = np.clip(np.rint(centers[:, 1]).astype(np.int64), 0, width - 1)
    colors = lab[sample_y, sample_x].copy()
    labels = _assign(lab, centers, colors, step, compactness)
    for _ in range(iters - 1):
        centers, colors = _update(lab, labels, centers.shape[0], centers, colors)
        labels = _assign(lab, centers, colors, step, compactness)
    if (labels < 0).any():
        # pixels outside every window join the nearest center by position
        missing = np.argwhere(labels < 0)
        d2 = ((missing[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        labels[missing[:, 0], missing[:, 1]] = d2.argmin(axis=1)
    ids, count = relabel_sequential(enforce_connectivity(labels))
    logger.debug("SLIC: requested %d superpixels, produced %d", n, count)
    return build_superpixel_map(ids, step)
