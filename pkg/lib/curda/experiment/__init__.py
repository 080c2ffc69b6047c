"""Experiment orchestration: cached stages, the method x seed grid and the studies built on it."""

from curda.experiment.cells import PREDICTION_FILES, RESULT_SCHEMA_VERSION, cell_directory, cell_name, is_done, load_predictions, run_cell, train_config_for
from curda.experiment.fusion import FusionResult, fuse_cells
from curda.experiment.grid import GridSummary, collect_records, prepare_stages, run_experiment, summarize, write_result_files
from curda.experiment.methods import Family, MethodSpec, parse_method, parse_methods
from curda.experiment.mixing import MixingRow, MixMode, labeled_count, run_mixing_study
from curda.experiment.stages import DONE_MARKER, all_estimators, benchmark_directory, content_hash, fit_estimator, load_or_build_landmarks, load_or_generate_benchmark, superpixel_settings, target_views
from curda.experiment.sweep import run_gamma_sweep

__all__ = [
    "DONE_MARKER",
    "PREDICTION_FILES",
    "RESULT_SCHEMA_VERSION",
    "Family",
    "FusionResult",
    "GridSummary",
    "MethodSpec",
    "MixMode",
    "MixingRow",
    "all_estimators",
    "benchmark_directory",
    "cell_directory",
    "cell_name",
    "collect_records",
    "content_hash",
    "fit_estimator",
    "fuse_cells",
    "is_done",
    "labeled_count",
    "load_or_build_landmarks",
    "load_or_generate_benchmark",
    "load_predictions",
    "parse_method",
    "parse_methods",
    "prepare_stages",
    "run_cell",
    "run_experiment",
    "run_gamma_sweep",
    "run_mixing_study",
    "summarize",
    "superpixel_settings",
    "target_views",
    "train_config_for",
    "write_result_files",
]
