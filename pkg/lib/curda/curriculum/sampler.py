"""Mini-batch schedule: distinct images within a batch, independent draws across steps."""

from __future__ import annotations

from dataclasses import dataclass

from curda.curriculum.settings import TrainConfig
from curda.numerics import IntArray
from curda.rng import SplitMix64, derive_seed


@dataclass(frozen=True)
class SamplerState:
    """Positions of the source and target streams; the two never share draws."""

    source: tuple[int, int]
    target: tuple[int, int]

    @classmethod
    def from_seed(cls, seed: int) -> SamplerState:
        return cls(source=(derive_seed(seed, "source-batches"), 0), target=(derive_seed(seed, "target-batches"), 0))


def sample_batch(state: SamplerState, source_count: int, target_count: int, config: TrainConfig) -> tuple[IntArray, IntArray, SamplerState]:
    """
    Draw source and target image indices for one step.

    Raises:
        ValueError: if a batch is larger than its dataset.
    """
    if config.src_batch > source_count:
        msg = f"source batch of {config.src_batch} exceeds the {source_count} source images"
        raise ValueError(msg)
    if config.tgt_batch > target_count:
        msg = f"target batch of {config.tgt_batch} exceeds the {target_count} target images"
        raise ValueError(msg)
    source_rng = SplitMix64.from_state(state.source)
    target_rng = SplitMix64.from_state(state.target)
    source = source_rng.sample_without_replacement(source_count, config.src_batch)
    target = target_rng.sample_without_replacement(target_count, config.tgt_batch)
    return source, target, SamplerState(source=source_rng.state, target=target_rng.state)
