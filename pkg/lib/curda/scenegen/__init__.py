"""Procedural source/target urban-scene datasets with dense labels."""

from curda.scenegen.dataset import (
    SPLIT_NAMES,
    SOURCE_TRAIN,
    TARGET_TEST,
    TARGET_TRAIN,
    TARGET_VAL,
    Benchmark,
    Dataset,
    SplitCounts,
    generate_benchmark,
    generate_dataset,
    load_benchmark,
    load_dataset,
    save_benchmark,
    save_dataset,
)
from curda.scenegen.painter import Scene, generate_scene
from curda.scenegen.params import (
    CLASS_NAMES,
    NUM_CLASSES,
    PAINTER_ORDER,
    Domain,
    DomainKind,
    DomainParams,
    default_domain_params,
)

__all__ = [
    "CLASS_NAMES",
    "NUM_CLASSES",
    "PAINTER_ORDER",
    "SOURCE_TRAIN",
    "SPLIT_NAMES",
    "TARGET_TEST",
    "TARGET_TRAIN",
    "TARGET_VAL",
    "Benchmark",
    "Dataset",
    "Domain",
    "DomainKind",
    "DomainParams",
    "Scene",
    "SplitCounts",
    "default_domain_params",
    "generate_benchmark",
    "generate_dataset",
    "generate_scene",
    "load_benchmark",
    "load_dataset",
    "save_benchmark",
    "save_dataset",
]
