"""The training loop: sample, evaluate the objective, back-propagate, AdaDelta."""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from curda.curriculum.loss import Batch, build_samples
from curda.curriculum.properties import TargetProperties
from curda.curriculum.sampler import SamplerState, sample_batch
from curda.curriculum.settings import TrainConfig
from curda.errors import DivergenceError
from curda.numerics import FloatArray, IntArray
from curda.rng import derive_seed
from curda.segmodel import IMAGE_TAG, SOURCE_TAG, SUPERPIXEL_TAG, AdaDeltaState, ModelParams, adadelta_step, init_model, loss_and_grad, save_checkpoint

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("step", "total", "src_term", "img_term", "sp_term")


@dataclass(frozen=True)
class HistoryRow:
    step: int
    total: float
    src_term: float
    img_term: float
    sp_term: float


@dataclass
class TrainResult:
    params: ModelParams
    state: AdaDeltaState
    history: list[HistoryRow] = field(default_factory=list[HistoryRow])


def initial_model(config: TrainConfig, num_classes: int) -> ModelParams:
    return init_model(config.features, num_classes, derive_seed(config.seed, "init"))


def train(
    config: TrainConfig,
    source_images: Sequence[FloatArray],
    source_masks: Sequence[IntArray],
    target_images: Sequence[FloatArray],
    props: TargetProperties | None,
    num_classes: int,
    *,
    checkpoint_dir: Path | None = None,
    init: ModelParams | None = None,
) -> TrainResult:
    """
    Run ``config.steps`` optimizer steps on the curriculum objective.

    The run is deterministic in ``config.seed``: it fixes the initial weights
    and the source and target batch streams.

    Raises:
        DivergenceError: carrying the step index and loss components when the
            objective becomes non-finite.
    """
    if len(source_images) != len(source_masks):
        msg = f"got {len(source_images)} source images but {len(source_masks)} masks"
        raise ValueError(msg)
    if props is not None and len(props) != len(target_images):
        msg = f"target properties cover {len(props)} images, expected {len(target_images)}"
        raise ValueError(msg)
    params = init or initial_model(config, num_classes)
    state = AdaDeltaState.fresh(params.vector.size)
    sampler = SamplerState.from_seed(config.seed)
    history: list[HistoryRow] = []
    for step in range(config.steps):
        source_idx, target_idx, sampler = sample_batch(sampler, len(source_images), len(target_images), config)
        batch = Batch(
            source_images=[source_images[i] for i in source_idx],
            source_masks=[source_masks[i] for i in source_idx],
            target_images=[target_images[i] for i in target_idx],
            target_indices=[int(i) for i in target_idx],
        )
        try:
            result = loss_and_grad(params, build_samples(batch, props, config), config.k)
        except DivergenceError as error:
            raise DivergenceError("training", step=step, components=error.components) from error
        assert result.grad is not None
        vector, state = adadelta_step(state, params.vector, result.grad)
        params = params.with_vector(vector)
        row = HistoryRow(
            step=step,
            total=result.loss,
            src_term=result.components.get(SOURCE_TAG, 0.0),
            img_term=result.components.get(IMAGE_TAG, 0.0),
            sp_term=result.components.get(SUPERPIXEL_TAG, 0.0),
        )
        history.append(row)
        if config.log_every and (step + 1) % config.log_every == 0:
            logger.info("step %d/%d: loss %.5f (src %.5f, img %.5f, sp %.5f)", step + 1, config.steps, row.total, row.src_term, row.img_term, row.sp_term)
        if checkpoint_dir is not None and config.checkpoint_every and (step + 1) % config.checkpoint_every == 0:
            save_checkpoint(checkpoint_dir / f"step_{step + 1:06d}.ckpt", params, state)
    return TrainResult(params=params, state=state, history=history)


def write_history_csv(path: Path, history: Sequence[HistoryRow]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(HISTORY_COLUMNS)
        for row in history:
            writer.writerow([row.step, repr(row.total), repr(row.src_term), repr(row.img_term), repr(row.sp_term)])
    return path
