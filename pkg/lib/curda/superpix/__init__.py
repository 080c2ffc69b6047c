"""Superpixel oversegmentation, contextual features and dominant labels."""

from curda.superpix.features import BLOCK_SIZE, FEATURE_SIZE, local_blocks, probe_neighbours, superpixel_features
from curda.superpix.labels import (
    GRANULARITY_COUNTS,
    GranularityRow,
    boundary_crossings,
    boundary_map,
    boundary_recall,
    dominant_labels,
    granularity_study,
    label_agreement,
    paint_labels,
    save_boundary_pgm,
    save_ids,
)
from curda.superpix.slic import SuperpixelMap, build_superpixel_map, enforce_connectivity, relabel_sequential, slic_segment

__all__ = [
    "BLOCK_SIZE",
    "FEATURE_SIZE",
    "GRANULARITY_COUNTS",
    "GranularityRow",
    "SuperpixelMap",
    "boundary_crossings",
    "boundary_map",
    "boundary_recall",
    "build_superpixel_map",
    "dominant_labels",
    "enforce_connectivity",
    "granularity_study",
    "label_agreement",
    "local_blocks",
    "paint_labels",
    "probe_neighbours",
    "relabel_sequential",
    "save_boundary_pgm",
    "save_ids",
    "slic_segment",
    "superpixel_features",
]
