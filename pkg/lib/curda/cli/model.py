"""Single-model commands: train one method, evaluate a checkpoint, check gradients."""

import json
from pathlib import Path
from typing import Annotated

import typer

from curda.cli.options import (
    ConfigOption,
    EstimatorOption,
    GammaOption,
    OutOption,
    RatioOption,
    SeedOption,
    SeedsOption,
    SetOption,
    SpCountOption,
    StepsOption,
    load_config,
    out_directory,
    reported_errors,
)
from curda.curriculum import composite_check
from curda.evaluation import evaluate_masks, save_confusion_csv
from curda.experiment import load_or_generate_benchmark, parse_method, run_cell, target_views
from curda.scenegen.params import CLASS_NAMES
from curda.segmodel import load_checkpoint, predict_masks


def train(
    method: Annotated[str, typer.Option("--method", "-m", help="Method to train, e.g. Ours(CC+I+SP).")] = "Ours(I+SP)",
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    seeds: SeedsOption = None,
    gamma: GammaOption = None,
    steps: StepsOption = None,
    estimator: EstimatorOption = None,
    sp_count: SpCountOption = None,
    landmark_ratio: RatioOption = None,
    assignments: SetOption = None,
) -> None:
    """Train and score one method for each training seed, ignoring completion markers.

    Examples:

        curda train -m "Ours(CC+I+SP)" --seeds 0 --steps 200
    """
    with reported_errors():
        settings = load_config(
            config,
            assignments,
            out=out,
            seed=seed,
            seeds=seeds,
            gamma=gamma,
            steps=steps,
            estimator=estimator,
            sp_count=sp_count,
            landmark_ratio=landmark_ratio,
        )
        spec = parse_method(method)
        for train_seed in settings.seeds:
            record = run_cell(settings, spec, train_seed, out_directory(settings))
            typer.echo(f"{spec.name} seed {train_seed}: mIoU {record['miou']}")


def evaluate(
    checkpoint: Annotated[Path, typer.Argument(help="Model checkpoint.", exists=True, dir_okay=False)],
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    assignments: SetOption = None,
    split: Annotated[str, typer.Option("--split", help="Target split to score.")] = "target_test",
    cc: Annotated[bool, typer.Option("--cc/--no-cc", help="Calibrate target colors first.")] = False,
) -> None:
    """Score a checkpoint on a target split: per-class IoU, mIoU and the normalized confusion matrix."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed)
        root = out_directory(settings)
        benchmark = load_or_generate_benchmark(settings, root / "cache")
        views = target_views(benchmark, cc)
        images = {"target_train": views.train, "target_val": views.val, "target_test": views.test}.get(split)
        if images is None:
            msg = f"--split must be one of target_train, target_val, target_test, got {split!r}"
            raise ValueError(msg)
        params, _ = load_checkpoint(checkpoint)
        num_classes = benchmark.source_train.num_classes
        cm, report = evaluate_masks(predict_masks(params, images), benchmark.split(split).masks, num_classes)
        names = CLASS_NAMES[:num_classes]
        root.mkdir(parents=True, exist_ok=True)
        (root / "eval.json").write_text(json.dumps(report.to_dict(names) | {"confusion": cm.counts.tolist()}, indent=2), encoding="utf-8")
        save_confusion_csv(root / "eval_confusion_normalized.csv", cm, names, normalized=True)
        for name, value in zip(names, report.per_class, strict=True):
            typer.echo(f"  {name:<12} {value:.4f}")
        typer.echo(f"mIoU {report.miou:.4f}")


def gradcheck(
    seed: Annotated[int, typer.Option("--seed", help="Seed for the scenes, the weights and the coordinates.")] = 0,
    size: Annotated[int, typer.Option("--size", help="Crop size in pixels.")] = 8,
    features: Annotated[int, typer.Option("--features", help="Network width.")] = 4,
    coords: Annotated[int, typer.Option("--coords", help="Coordinates to check.")] = 100,
    k: Annotated[float, typer.Option("--k", help="Sharpening exponent.")] = 6.0,
    tolerance: Annotated[float, typer.Option("--tolerance", help="Largest accepted relative error.")] = 1e-4,
) -> None:
    """Compare the analytic gradient of the full objective with central differences."""
    with reported_errors():
        report = composite_check(seed, size=size, features=features, k=k, coords=coords)
        typer.echo(f"Checked {len(report.coords)} coordinates, max relative error {report.max_error:.3e}")
        if report.skipped:
            typer.echo(f"Skipped {len(report.skipped)} coordinates at a ReLU or arg-max kink: {report.skipped}")
        if not report.passed(tolerance):
            typer.echo(f"Error: relative error above {tolerance:g}", err=True)
            raise typer.Exit(1)
