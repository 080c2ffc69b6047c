"""curda - curriculum domain adaptation for semantic segmentation on synthetic urban scenes."""

from curda.config import ExperimentConfig, parse_config
from curda.curriculum import TrainConfig, train
from curda.errors import ConfigError, DivergenceError, TensorFormatError
from curda.experiment import run_experiment, run_gamma_sweep, run_mixing_study
from curda.scenegen import CLASS_NAMES, NUM_CLASSES, generate_benchmark

__all__ = [
    "CLASS_NAMES",
    "NUM_CLASSES",
    "ConfigError",
    "DivergenceError",
    "ExperimentConfig",
    "TensorFormatError",
    "TrainConfig",
    "generate_benchmark",
    "parse_config",
    "run_experiment",
    "run_gamma_sweep",
    "run_mixing_study",
    "train",
]
