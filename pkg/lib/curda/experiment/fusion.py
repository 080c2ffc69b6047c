"""Late fusion of two finished grid cells."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from curda.config import ExperimentConfig
from curda.evaluation import Pick, classwise_selection, evaluate_masks, fuse_all
from curda.experiment.cells import PREDICTION_FILES, cell_directory, is_done, load_predictions
from curda.experiment.methods import parse_method
from curda.experiment.stages import load_or_generate_benchmark
from curda.scenegen.params import CLASS_NAMES

logger = logging.getLogger(__name__)

FUSION_JSON = "fusion.json"


def _score(value: float) -> float | None:
    return None if math.isnan(value) else value


@dataclass(frozen=True)
class FusionResult:
    method_a: str
    method_b: str
    selection: dict[int, Pick]
    miou_a: float
    miou_b: float
    miou_fused: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": self.method_a,
            "b": self.method_b,
            "selection": {CLASS_NAMES[class_id]: pick.value for class_id, pick in sorted(self.selection.items())},
            "miou_a": _score(self.miou_a),
            "miou_b": _score(self.miou_b),
            "miou_fused": _score(self.miou_fused),
        }


def fuse_cells(config: ExperimentConfig, cell_a: tuple[str, int], cell_b: tuple[str, int], out_root: Path | None = None) -> FusionResult:
    """
    Pick classes on target validation, fuse the two cells' test predictions
    and score all three on target test. ``cell_a`` is (method, seed) of the
    model whose selected classes take precedence.

    Raises:
        FileNotFoundError: if either cell has not finished.
    """
    out = Path(out_root) if out_root is not None else Path(config.out)
    specs = [(parse_method(method), seed) for method, seed in (cell_a, cell_b)]
    for spec, seed in specs:
        if not is_done(out, spec, seed):
            msg = f"Cell {spec.name} seed {seed} has not finished under {out}"
            raise FileNotFoundError(msg)
    (spec_a, seed_a), (spec_b, seed_b) = specs
    dir_a, dir_b = cell_directory(out, spec_a, seed_a), cell_directory(out, spec_b, seed_b)
    benchmark = load_or_generate_benchmark(config, out / "cache")
    num_classes = benchmark.source_train.num_classes
    val_a, val_b = load_predictions(dir_a / PREDICTION_FILES["val"]), load_predictions(dir_b / PREDICTION_FILES["val"])
    selection = classwise_selection(val_a, val_b, benchmark.target_val.masks, num_classes)
    test_a, test_b = load_predictions(dir_a / PREDICTION_FILES["test"]), load_predictions(dir_b / PREDICTION_FILES["test"])
    gts = benchmark.target_test.masks
    result = FusionResult(
        method_a=f"{spec_a.name}#{seed_a}",
        method_b=f"{spec_b.name}#{seed_b}",
        selection=selection,
        miou_a=evaluate_masks(test_a, gts, num_classes)[1].miou,
        miou_b=evaluate_masks(test_b, gts, num_classes)[1].miou,
        miou_fused=evaluate_masks(fuse_all(test_a, test_b, selection), gts, num_classes)[1].miou,
    )
    (out / FUSION_JSON).write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")
    logger.info("Fusion %s + %s: %.4f / %.4f -> %.4f", result.method_a, result.method_b, result.miou_a, result.miou_b, result.miou_fused)
    return result
