"""pytest configuration for all tests."""

from pathlib import Path

import pytest

from curda.config import ExperimentConfig
from curda.scenegen import Benchmark, SplitCounts, generate_benchmark


@pytest.fixture(scope="session")
def tiny_benchmark() -> Benchmark:
    """A few 16x16 scenes per split, shared by the whole session."""
    return generate_benchmark(7, SplitCounts(source_train=6, target_train=4, target_val=3, target_test=3), 16, 16)


@pytest.fixture
def quick_config(tmp_path: Path) -> ExperimentConfig:
    """A grid config small enough to run every stage in a unit test."""
    return ExperimentConfig(
        seed=7,
        width=16,
        height=16,
        source_count=6,
        target_train_count=4,
        target_val_count=3,
        target_test_count=3,
        seeds=(0,),
        methods=("NoAdapt",),
        steps=3,
        src_batch=2,
        tgt_batch=2,
        no_adapt_batch=3,
        features=4,
        lr_epochs=20,
        sp_count=8,
        slic_iters=3,
        svm_epochs=3,
        out=str(tmp_path / "run"),
    )
