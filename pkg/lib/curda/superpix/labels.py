"""Dominant superpixel labels and partition-quality measures."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from curda.io import save_tensor
from curda.numerics import FloatArray, IntArray
from curda.superpix.slic import SuperpixelMap, slic_segment

logger = logging.getLogger(__name__)

GRANULARITY_COUNTS: tuple[int, ...] = (50, 100, 200, 400)


def dominant_labels(spmap: SuperpixelMap, mask: IntArray, num_classes: int | None = None) -> IntArray:
    """Most frequent class per superpixel; ties go to the smallest class id."""
    if mask.shape != spmap.ids.shape:
        msg = f"mask shape {mask.shape} does not match superpixel map shape {spmap.ids.shape}"
        raise ValueError(msg)
    if num_classes is None:
        num_classes = int(mask.max()) + 1
    pairs = spmap.ids.reshape(-1) * num_classes + mask.reshape(-1)
    counts = np.bincount(pairs, minlength=spmap.count * num_classes).reshape(spmap.count, num_classes)
    return counts.argmax(axis=1).astype(np.int64)


def paint_labels(spmap: SuperpixelMap, labels: IntArray) -> IntArray:
    """Dense (H, W) mask giving every pixel its superpixel's label."""
    return np.asarray(labels, dtype=np.int64)[spmap.ids]


def label_agreement(spmap: SuperpixelMap, mask: IntArray, num_classes: int | None = None) -> float:
    """Fraction of pixels whose class equals their superpixel's dominant label."""
    painted = paint_labels(spmap, dominant_labels(spmap, mask, num_classes))
    return float((painted == mask).mean())


def boundary_map(labels: IntArray) -> np.ndarray:
    """Pixels with a 4-neighbour of a different label."""
    edges = np.zeros(labels.shape, dtype=bool)
    horizontal = labels[:, 1:] != labels[:, :-1]
    vertical = labels[1:, :] != labels[:-1, :]
    edges[:, 1:] |= horizontal
    edges[:, :-1] |= horizontal
    edges[1:, :] |= vertical
    edges[:-1, :] |= vertical
    return edges


def _dilate(edges: np.ndarray) -> np.ndarray:
    grown = edges.copy()
    grown[1:, :] |= edges[:-1, :]
    grown[:-1, :] |= edges[1:, :]
    grown[:, 1:] |= edges[:, :-1]
    grown[:, :-1] |= edges[:, 1:]
    grown[1:, 1:] |= edges[:-1, :-1]
    grown[1:, :-1] |= edges[:-1, 1:]
    grown[:-1, 1:] |= edges[1:, :-1]
    grown[:-1, :-1] |= edges[1:, 1:]
    return grown


def boundary_recall(spmap: SuperpixelMap, mask: IntArray) -> float:
    """Fraction of true mask boundary pixels within 1 px of a superpixel boundary (1.0 without boundaries)."""
    truth = boundary_map(mask)
    total = int(truth.sum())
    if total == 0:
        return 1.0
    near = _dilate(boundary_map(spmap.ids))
    return float((truth & near).sum() / total)


def boundary_crossings(spmap: SuperpixelMap, mask: IntArray) -> int:
    """Number of superpixels containing more than one mask class."""
    pairs = np.unique(spmap.ids.reshape(-1) * (int(mask.max()) + 1) + mask.reshape(-1))
    owners = pairs // (int(mask.max()) + 1)
    return int((np.bincount(owners, minlength=spmap.count) > 1).sum())


@dataclass(frozen=True)
class GranularityRow:
    n: int
    mean_count: float
    agreement: float
    recall: float


def granularity_study(
    images: list[FloatArray],
    masks: list[IntArray],
    num_classes: int,
    counts: tuple[int, ...] = GRANULARITY_COUNTS,
    *,
    compactness: float = 10.0,
    iters: int = 10,
) -> list[GranularityRow]:
    """Mean dominant-label agreement and boundary recall for each superpixel count."""
    rows: list[GranularityRow] = []
    for n in counts:
        maps = [slic_segment(image, n, compactness, iters) for image in images]
        agreement = float(np.mean([label_agreement(m, mask, num_classes) for m, mask in zip(maps, masks, strict=True)]))
        recall = float(np.mean([boundary_recall(m, mask) for m, mask in zip(maps, masks, strict=True)]))
        rows.append(GranularityRow(n=n, mean_count=float(np.mean([m.count for m in maps])), agreement=agreement, recall=recall))
        logger.info("n=%d: agreement %.4f, boundary recall %.4f", n, agreement, recall)
    return rows


def save_ids(path: Path, spmap: SuperpixelMap) -> Path:
    """Dump the id map as an int32 tensor file."""
    return save_tensor(path, spmap.ids.astype(np.int32))


def save_boundary_pgm(path: Path, image: FloatArray, spmap: SuperpixelMap) -> Path:
    """Binary PGM of the gray image with superpixel boundaries drawn white."""
    gray = 0.299 * image[..., 0] + 0.587 * image[..., 1] + 0.114 * image[..., 2]
    pixels = np.clip(np.rint(gray * 200.0), 0, 255).astype(np.uint8)
    pixels[boundary_map(spmap.ids)] = 255
    height, width = pixels.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes())
    return path
