"""Dataset, estimator, superpixel and landmark commands."""

import csv
import json
from dataclasses import asdict
from typing import Annotated

import typer

from curda.cli.options import ConfigOption, EstimatorOption, OutOption, RatioOption, SeedOption, SetOption, SpCountOption, WorkersOption, load_config, out_directory, reported_errors
from curda.evaluation import chi2_report, save_chi2_csv
from curda.experiment import all_estimators, benchmark_directory, fit_estimator, load_or_build_landmarks, load_or_generate_benchmark, superpixel_settings, target_views
from curda.landmark import landmark_diagnostics
from curda.scenegen import SPLIT_NAMES
from curda.superpix import dominant_labels, granularity_study, save_boundary_pgm, save_ids, slic_segment


def gen(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None, assignments: SetOption = None, workers: WorkersOption = None) -> None:
    """Generate (or load from cache) the source and target splits.

    Examples:

        curda gen --out runs/demo --seed 3
    """
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed)
        cache = out_directory(settings) / "cache"
        benchmark = load_or_generate_benchmark(settings, cache, workers)
        for name in SPLIT_NAMES:
            typer.echo(f"  {name}: {len(benchmark.split(name))} scenes")
        typer.echo(f"Benchmark in {benchmark_directory(settings, cache)}")


def estimate(
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    estimator: EstimatorOption = None,
    assignments: SetOption = None,
) -> None:
    """Fit the label-distribution estimators and write chi-squared distances on target validation."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed, estimator=estimator)
        root = out_directory(settings)
        cache = root / "cache"
        benchmark = load_or_generate_benchmark(settings, cache)
        estimators = [fit_estimator(settings, benchmark, settings.estimator, cache)] if estimator else all_estimators(settings, benchmark, cache)
        rows = chi2_report(estimators, benchmark.target_val.images, benchmark.target_val.masks, benchmark.source_train.num_classes)
        path = save_chi2_csv(root / "chi2.csv", rows)
        for row in rows:
            typer.echo(f"  {row.estimator:<8} mean {row.mean:.4f}  std {row.std:.4f}")
        typer.echo(f"Wrote {path}")


def superpix(
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    sp_count: SpCountOption = None,
    assignments: SetOption = None,
    split: Annotated[str, typer.Option("--split", help="Split to oversegment.")] = "target_val",
    limit: Annotated[int, typer.Option("--limit", help="Number of scenes to process.")] = 5,
    study: Annotated[bool, typer.Option("--study", help="Run the granularity study over 50, 100, 200 and 400 superpixels.")] = False,
) -> None:
    """Oversegment scenes, writing id maps and boundary overlays, or run the granularity study."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed, sp_count=sp_count)
        root = out_directory(settings)
        dataset = load_or_generate_benchmark(settings, root / "cache").split(split)
        images, masks = dataset.images[:limit], dataset.masks[:limit]
        if study:
            rows = granularity_study(images, masks, dataset.num_classes, compactness=settings.compactness, iters=settings.slic_iters)
            path = root / "granularity.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["n", "mean_count", "agreement", "recall"])
                for row in rows:
                    writer.writerow([row.n, repr(row.mean_count), repr(row.agreement), repr(row.recall)])
                    typer.echo(f"  n={row.n:<4} superpixels {row.mean_count:6.1f}  agreement {row.agreement:.4f}  recall {row.recall:.4f}")
            typer.echo(f"Wrote {path}")
            return
        directory = root / "superpixels" / split
        for index, image in enumerate(images):
            spmap = slic_segment(image, settings.sp_count, settings.compactness, settings.slic_iters)
            save_ids(directory / f"{index:04d}.ids", spmap)
            save_boundary_pgm(directory / f"{index:04d}.pgm", image, spmap)
            typer.echo(f"  scene {index}: {spmap.count} superpixels")
        typer.echo(f"Wrote {len(images)} id maps to {directory}")


def landmark(
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    sp_count: SpCountOption = None,
    landmark_ratio: RatioOption = None,
    assignments: SetOption = None,
    cc: Annotated[bool, typer.Option("--cc/--no-cc", help="Calibrate target colors first.")] = False,
    workers: WorkersOption = None,
) -> None:
    """Train the superpixel SVM, select target landmarks and report their accuracy."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed, sp_count=sp_count, landmark_ratio=landmark_ratio)
        root = out_directory(settings)
        benchmark = load_or_generate_benchmark(settings, root / "cache", workers)
        views = target_views(benchmark, cc)
        result = load_or_build_landmarks(settings, benchmark, views.train, cc=cc, cache_root=root / "cache", workers=workers)
        num_classes = benchmark.source_train.num_classes
        truths = [dominant_labels(item.spmap, mask, num_classes) for item, mask in zip(result.scored, benchmark.target_train.masks, strict=True)]
        report = landmark_diagnostics(result.scored, truths, result.landmarks)
        path = root / ("landmarks_cc.json" if cc else "landmarks.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        result.landmarks.save(path)
        (root / "landmarks_diag.json").write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        typer.echo(f"SVM training accuracy {result.train_accuracy:.4f}")
        typer.echo(f"{len(result.landmarks)} landmarks: accuracy {report.landmark_accuracy:.4f} vs {report.overall_accuracy:.4f} over all superpixels")
        typer.echo(f"Superpixel settings: {asdict(superpixel_settings(settings))}")
        typer.echo(f"Wrote {path}")
