"""Gamma sweep: one method trained over a list of mixing weights."""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from pathlib import Path

from curda.config import ExperimentConfig
from curda.experiment.grid import GridSummary, run_experiment
from curda.experiment.methods import parse_method

logger = logging.getLogger(__name__)

SWEEP_CSV = "sweep.csv"


def gamma_directory(out_root: Path, gamma: float) -> Path:
    return out_root / "sweep" / f"gamma_{gamma:g}"


def run_gamma_sweep(
    config: ExperimentConfig,
    method: str,
    gammas: Sequence[float] | None = None,
    out_root: Path | None = None,
    *,
    workers: int | None = None,
) -> dict[float, GridSummary]:
    """
    Run ``method`` over all seeds once per gamma, each in its own grid
    directory, and write one ``sweep.csv`` row per (gamma, seed).
    """
    out = Path(out_root) if out_root is not None else Path(config.out)
    name = parse_method(method).with_cc(config.cc).name
    results: dict[float, GridSummary] = {}
    for gamma in gammas if gammas is not None else config.gamma_sweep:
        sweep_config = config.with_overrides({"gamma": gamma, "methods": [name]})
        logger.info("Sweep: %s with gamma %g", name, gamma)
        results[gamma] = run_experiment(sweep_config, gamma_directory(out, gamma), workers=workers)
    with (out / SWEEP_CSV).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["gamma", "method", "seed", "status", "miou"])
        for gamma, summary in results.items():
            for record in summary.records:
                writer.writerow([gamma, record["method"], record["seed"], record["status"], "" if record.get("miou") is None else repr(record["miou"])])
    return results
