"""Curriculum training: source pixel loss plus target label-distribution matching."""

from curda.curriculum.checks import composite_check
from curda.curriculum.loss import Batch, build_samples, total_loss
from curda.curriculum.properties import LandmarkRegion, TargetProperties, build_target_properties
from curda.curriculum.sampler import SamplerState, sample_batch
from curda.curriculum.settings import NO_ADAPT_SOURCE_BATCH, TrainConfig
from curda.curriculum.trainer import HISTORY_COLUMNS, HistoryRow, TrainResult, initial_model, train, write_history_csv

__all__ = [
    "HISTORY_COLUMNS",
    "NO_ADAPT_SOURCE_BATCH",
    "Batch",
    "HistoryRow",
    "LandmarkRegion",
    "SamplerState",
    "TargetProperties",
    "TrainConfig",
    "TrainResult",
    "build_samples",
    "build_target_properties",
    "composite_check",
    "initial_model",
    "sample_batch",
    "total_loss",
    "train",
    "write_history_csv",
]
