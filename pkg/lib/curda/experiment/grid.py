"""The (method x seed) experiment grid and its result files.

Shared stages (benchmark, estimator, landmarks) are prepared in the parent
process; cells then run serially or in worker processes. Result files are
rebuilt from the per-cell records after every run, ordered by method and
seed, so a rerun over finished cells rewrites them byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from curda.config import ExperimentConfig, save_effective_config
from curda.evaluation import chi2_report, pairwise_wins, save_chi2_csv, win_matrix
from curda.experiment.cells import (
    RESULT_NAME,
    RESULT_SCHEMA_VERSION,
    cell_directory,
    failed_record,
    is_done,
    read_cell_record,
    run_cell,
    write_cell_record,
)
from curda.experiment.methods import Family, MethodSpec, parse_methods
from curda.experiment.stages import all_estimators, fit_estimator, load_or_build_landmarks, load_or_generate_benchmark, target_views
from curda.landmark import landmark_diagnostics
from curda.parallel import worker_count
from curda.scenegen import Benchmark
from curda.scenegen.params import CLASS_NAMES
from curda.superpix import dominant_labels

logger = logging.getLogger(__name__)

RESULTS_JSONL = "results.jsonl"
RESULTS_CSV = "results.csv"
TIMINGS_CSV = "timings.csv"
SUMMARY_JSON = "summary.json"
CHI2_CSV = "chi2.csv"
LANDMARK_DIAGNOSTICS = "landmarks_diag.json"


@dataclass(frozen=True)
class GridSummary:
    out: Path
    records: list[dict[str, Any]] = field(default_factory=list[dict[str, Any]])

    @property
    def failed(self) -> list[dict[str, Any]]:
        return [record for record in self.records if record.get("status") != "ok"]

    @property
    def ok(self) -> bool:
        return not self.failed


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    temporary = path.with_name(path.name + ".tmp")
    temporary.write_text(text, encoding="utf-8")
    os.replace(temporary, path)


def _run_job(config: ExperimentConfig, spec: MethodSpec, seed: int, out_root: Path) -> dict[str, Any]:
    """Worker entry point; a failing cell is recorded instead of raised."""
    try:
        return run_cell(config, spec, seed, out_root)
    except Exception as error:
        logger.warning("%s seed %d failed: %s", spec.name, seed, error)
        record = failed_record(spec, seed, error)
        write_cell_record(cell_directory(out_root, spec, seed), record)
        return record


def prepare_stages(config: ExperimentConfig, benchmark: Benchmark, specs: list[MethodSpec], out_root: Path, workers: int | None = None) -> None:
    """Build every cached stage the cells will read, plus the estimator and landmark reports."""
    cache = out_root / "cache"
    num_classes = benchmark.source_train.num_classes
    estimators = all_estimators(config, benchmark, cache)
    rows = chi2_report(estimators, benchmark.target_val.images, benchmark.target_val.masks, num_classes)
    save_chi2_csv(out_root / CHI2_CSV, rows)
    for row in rows:
        logger.info("chi2 %-8s mean %.4f std %.4f", row.estimator, row.mean, row.std)
    if any(spec.family is Family.OURS for spec in specs):
        fit_estimator(config, benchmark, config.estimator, cache)

    diagnostics: dict[str, Any] = {}
    for cc in sorted({spec.cc for spec in specs if spec.needs_landmarks}):
        views = target_views(benchmark, cc)
        result = load_or_build_landmarks(config, benchmark, views.train, cc=cc, cache_root=cache, workers=workers)
        truths = [dominant_labels(item.spmap, mask, num_classes) for item, mask in zip(result.scored, benchmark.target_train.masks, strict=True)]
        report = landmark_diagnostics(result.scored, truths, result.landmarks)
        diagnostics["cc" if cc else "plain"] = report.to_dict() | {"svm_train_accuracy": result.train_accuracy, "landmarks": len(result.landmarks)}
        logger.info(
            "Landmarks%s: %d selected, accuracy %.3f vs %.3f over all superpixels",
            " (CC)" if cc else "",
            len(result.landmarks),
            report.landmark_accuracy,
            report.overall_accuracy,
        )
    if diagnostics:
        _write_atomic(out_root / LANDMARK_DIAGNOSTICS, json.dumps(_finite(diagnostics), indent=2, sort_keys=True))


def _finite(value: Any) -> Any:
    """NaN becomes null so the JSON files stay standard."""
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}  # pyright: ignore[reportUnknownVariableType]
    if isinstance(value, list | tuple):
        return [_finite(item) for item in value]  # pyright: ignore[reportUnknownVariableType]
    return value


def _run_pending(config: ExperimentConfig, pending: list[tuple[MethodSpec, int]], out_root: Path, workers: int | None) -> None:
    processes = min(worker_count(workers), len(pending))
    if processes <= 1:
        for spec, seed in pending:
            _run_job(config, spec, seed, out_root)
        return
    with ProcessPoolExecutor(max_workers=processes) as pool:
        futures = {pool.submit(_run_job, config, spec, seed, out_root): (spec, seed) for spec, seed in pending}
        for future in as_completed(futures):
            spec, seed = futures[future]
            try:
                future.result()
            except Exception as error:
                logger.warning("%s seed %d: worker failed: %s", spec.name, seed, error)
                write_cell_record(cell_directory(out_root, spec, seed), failed_record(spec, seed, error))


def collect_records(out_root: Path, specs: list[MethodSpec], seeds: tuple[int, ...]) -> list[dict[str, Any]]:
    """One record per requested cell in (method, seed) order; cells without a record count as failed."""
    records: list[dict[str, Any]] = []
    for spec in sorted(specs, key=lambda item: item.name):
        for seed in sorted(seeds):
            if is_done(out_root, spec, seed) or (cell_directory(out_root, spec, seed) / RESULT_NAME).exists():
                records.append(read_cell_record(out_root, spec, seed))
            else:
                records.append(failed_record(spec, seed, RuntimeError("cell did not run")))
    return records


def _per_class_values(record: dict[str, Any], names: list[str]) -> list[float]:
    per_class = record.get("per_class", {})
    return [math.nan if per_class.get(name) is None else float(per_class[name]) for name in names]


def _nan_stat(values: list[float], stat: str) -> float | None:
    finite = [value for value in values if not math.isnan(value)]
    if not finite:
        return None
    return float(np.median(finite)) if stat == "median" else float(np.mean(finite))


def summarize(records: list[dict[str, Any]], names: list[str], chi2_rows: list[dict[str, Any]] | None = None) -> dict[str, Any]:
    """Per-method statistics over seeds plus the class win matrix and pairwise wins on per-class medians."""
    methods: dict[str, Any] = {}
    per_class_medians: dict[str, list[float]] = {}
    for method in sorted({record["method"] for record in records}):
        rows = [record for record in records if record["method"] == method]
        ok = [record for record in rows if record.get("status") == "ok"]
        mious = [math.nan if record.get("miou") is None else float(record["miou"]) for record in ok]
        medians = [_nan_stat([_per_class_values(record, names)[c] for record in ok], "median") for c in range(len(names))]
        per_class_medians[method] = [math.nan if value is None else value for value in medians]
        methods[method] = {
            "seeds": [record["seed"] for record in ok],
            "failed_seeds": [record["seed"] for record in rows if record.get("status") != "ok"],
            "median_miou": _nan_stat(mious, "median"),
            "mean_miou": _nan_stat(mious, "mean"),
            "per_class_median": medians,
        }
    complete = {method: values for method, values in per_class_medians.items() if methods[method]["seeds"]}
    return _finite(
        {
            "schema_version": RESULT_SCHEMA_VERSION,
            "classes": names,
            "methods": methods,
            "win_matrix": win_matrix(complete),
            "pairwise_wins": pairwise_wins(complete),
            "chi2": chi2_rows or [],
        }
    )


def _read_chi2(path: Path) -> list[dict[str, Any]]:
    if not path.exists():
        return []
    with path.open(newline="", encoding="utf-8") as handle:
        return [{"estimator": row["estimator"], "mean": float(row["mean"]), "std": float(row["std"]), "count": int(row["count"])} for row in csv.DictReader(handle)]


def write_result_files(out_root: Path, records: list[dict[str, Any]], names: list[str]) -> None:
    """Rewrite results.jsonl, results.csv, timings.csv and summary.json from the cell records."""
    lines = [json.dumps(record, sort_keys=True) for record in records]
    _write_atomic(out_root / RESULTS_JSONL, "".join(f"{line}\n" for line in lines))

    table = io.StringIO()
    writer = csv.writer(table, lineterminator="\n")
    writer.writerow(["method", "seed", "status", "miou", *names, "road_fraction_pred", "road_fraction_gt"])
    for record in records:
        ious = _per_class_values(record, names) if record.get("status") == "ok" else [math.nan] * len(names)
        writer.writerow(
            [
                record["method"],
                record["seed"],
                record["status"],
                "" if record.get("miou") is None else repr(record["miou"]),
                *("" if math.isnan(value) else repr(value) for value in ious),
                repr(record["road_fraction_pred"]) if "road_fraction_pred" in record else "",
                repr(record["road_fraction_gt"]) if "road_fraction_gt" in record else "",
            ]
        )
    _write_atomic(out_root / RESULTS_CSV, table.getvalue())

    timings = io.StringIO()
    writer = csv.writer(timings, lineterminator="\n")
    writer.writerow(["method", "seed", "wall_clock_s"])
    for record in records:
        timing = out_root / "cells" / record["cell"] / "timing.json"
        writer.writerow([record["method"], record["seed"], json.loads(timing.read_text(encoding="utf-8"))["wall_clock_s"] if timing.exists() else ""])
    _write_atomic(out_root / TIMINGS_CSV, timings.getvalue())

    summary = summarize(records, names, _read_chi2(out_root / CHI2_CSV))
    _write_atomic(out_root / SUMMARY_JSON, json.dumps(summary, indent=2, sort_keys=True))


def run_experiment(config: ExperimentConfig, out_root: Path | None = None, *, workers: int | None = None) -> GridSummary:
    """
    Run every requested (method, seed) cell that has no completion marker yet.

    A failing cell is recorded with status ``failed`` and retried on the next
    run; the other cells proceed.
    """
    out = Path(out_root) if out_root is not None else Path(config.out)
    specs = parse_methods(config.methods, config.cc)
    save_effective_config(config, out)
    benchmark = load_or_generate_benchmark(config, out / "cache", workers)
    names = list(CLASS_NAMES[: benchmark.source_train.num_classes])

    pending = [(spec, seed) for spec in specs for seed in config.seeds if not is_done(out, spec, seed)]
    logger.info("Grid: %d cells, %d pending", len(specs) * len(config.seeds), len(pending))
    if pending:
        prepare_stages(config, benchmark, [spec for spec, _ in pending], out, workers)
        _run_pending(config, pending, out, workers)

    records = collect_records(out, specs, config.seeds)
    write_result_files(out, records, names)
    summary = GridSummary(out=out, records=records)
    for record in summary.failed:
        logger.warning("Cell %s seed %s failed: %s", record["method"], record["seed"], record.get("error", "unknown error"))
    return summary
