"""Supervised mixing study: how much labeled target data closes the domain gap."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from enum import StrEnum
from pathlib import Path

from curda.config import ExperimentConfig, save_effective_config
from curda.curriculum import TrainConfig, train
from curda.evaluation import evaluate_masks
from curda.experiment.stages import load_or_generate_benchmark
from curda.landmark import landmark_count
from curda.numerics import FloatArray, IntArray
from curda.segmodel import predict_masks

logger = logging.getLogger(__name__)

MIXING_CSV = "mixing.csv"
MIXING_JSONL = "mixing.jsonl"


class MixMode(StrEnum):
    SOURCE_AND_TARGET = "source+target"
    TARGET_ONLY = "target-only"


@dataclass(frozen=True)
class MixingRow:
    fraction: float
    mode: MixMode
    seed: int
    labeled: int
    status: str
    miou: float | None

    def to_dict(self) -> dict[str, object]:
        return asdict(self) | {"mode": self.mode.value}


def labeled_count(fraction: float, total: int) -> int:
    """ceil(fraction * total) with the product rounded to 9 decimals, so 0.1 * 100 gives 10."""
    return landmark_count(fraction, total)


def _supervised_run(
    config: ExperimentConfig,
    seed: int,
    images: list[FloatArray],
    masks: list[IntArray],
    test_images: list[FloatArray],
    test_masks: list[IntArray],
    num_classes: int,
) -> float | None:
    train_config = TrainConfig.no_adapt(
        k=config.k,
        steps=config.steps,
        seed=seed,
        features=config.features,
        src_batch=min(config.no_adapt_batch, len(images)),
    )
    result = train(train_config, images, masks, [], None, num_classes)
    _, report = evaluate_masks(predict_masks(result.params, test_images), test_masks, num_classes)
    return None if math.isnan(report.miou) else report.miou


def run_mixing_study(
    config: ExperimentConfig,
    fractions: Sequence[float] | None = None,
    out_root: Path | None = None,
) -> list[MixingRow]:
    """
    For each fraction f and seed, train (a) on the full source set plus the
    first ceil(f * N) labeled target-training scenes and (b) on those target
    scenes alone, both with pixel cross-entropy only, and score on target test.

    Mode (b) with no labeled scenes gives an ``n/a`` row.
    """
    out = Path(out_root) if out_root is not None else Path(config.out)
    save_effective_config(config, out)
    benchmark = load_or_generate_benchmark(config, out / "cache")
    source, target, test = benchmark.source_train, benchmark.target_train, benchmark.target_test
    num_classes = source.num_classes
    rows: list[MixingRow] = []
    for fraction in fractions if fractions is not None else config.mix_fractions:
        if not 0.0 <= fraction <= 1.0:
            msg = f"mixing fractions must lie in [0, 1], got {fraction}"
            raise ValueError(msg)
        labeled = labeled_count(fraction, len(target))
        target_images, target_masks = target.images[:labeled], target.masks[:labeled]
        for seed in config.seeds:
            miou = _supervised_run(config, seed, source.images + target_images, source.masks + target_masks, test.images, test.masks, num_classes)
            rows.append(MixingRow(fraction, MixMode.SOURCE_AND_TARGET, seed, labeled, "ok", miou))
            if labeled == 0:
                logger.warning("Fraction %.2f leaves no labeled target scenes; target-only row is n/a", fraction)
                rows.append(MixingRow(fraction, MixMode.TARGET_ONLY, seed, 0, "n/a", None))
                continue
            miou = _supervised_run(config, seed, target_images, target_masks, test.images, test.masks, num_classes)
            rows.append(MixingRow(fraction, MixMode.TARGET_ONLY, seed, labeled, "ok", miou))
            logger.info("Mixing f=%.2f seed %d: source+target %s, target-only %s", fraction, seed, rows[-2].miou, miou)
    write_mixing_files(out, rows)
    return rows


def write_mixing_files(out_root: Path, rows: Sequence[MixingRow]) -> None:
    out_root.mkdir(parents=True, exist_ok=True)
    with (out_root / MIXING_CSV).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["fraction", "mode", "seed", "labeled", "status", "miou"])
        for row in rows:
            writer.writerow([row.fraction, row.mode.value, row.seed, row.labeled, row.status, "" if row.miou is None else repr(row.miou)])
    (out_root / MIXING_JSONL).write_text("".join(json.dumps(row.to_dict(), sort_keys=True) + "\n" for row in rows), encoding="utf-8")
