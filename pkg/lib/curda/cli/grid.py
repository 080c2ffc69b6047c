"""Grid and study commands."""

from typing import Annotated

import typer

from curda.cli.options import (
    CCOption,
    ConfigOption,
    EstimatorOption,
    GammaOption,
    MethodsOption,
    OutOption,
    RatioOption,
    SeedOption,
    SeedsOption,
    SetOption,
    SpCountOption,
    StepsOption,
    WorkersOption,
    load_config,
    out_directory,
    reported_errors,
)
from curda.config import EFFECTIVE_CONFIG_NAME
from curda.experiment import fuse_cells, run_experiment, run_gamma_sweep, run_mixing_study


def experiment(
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    seeds: SeedsOption = None,
    methods: MethodsOption = None,
    cc: CCOption = None,
    gamma: GammaOption = None,
    sp_count: SpCountOption = None,
    landmark_ratio: RatioOption = None,
    estimator: EstimatorOption = None,
    steps: StepsOption = None,
    assignments: SetOption = None,
    workers: WorkersOption = None,
) -> None:
    """Run every (method, seed) cell without a completion marker and rewrite the result files.

    Exits with 1 if any cell failed.

    Examples:

        curda experiment --config samples/configs/quick.cfg

        curda experiment --methods "NoAdapt,Ours(I+SP)" --seeds 0,1 --steps 500
    """
    with reported_errors():
        settings = load_config(
            config,
            assignments,
            out=out,
            seed=seed,
            seeds=seeds,
            methods=methods,
            cc=cc,
            gamma=gamma,
            sp_count=sp_count,
            landmark_ratio=landmark_ratio,
            estimator=estimator,
            steps=steps,
        )
        summary = run_experiment(settings, out_directory(settings), workers=workers)
    for record in summary.records:
        miou = record.get("miou")
        typer.echo(f"  {record['method']:<16} seed {record['seed']}: {record['status']}" + (f"  mIoU {miou:.4f}" if isinstance(miou, float) else ""))
    typer.echo(f"Results in {summary.out}")
    if not summary.ok:
        typer.echo(f"Error: {len(summary.failed)} cell(s) failed", err=True)
        raise typer.Exit(1)


def mix(
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    seeds: SeedsOption = None,
    steps: StepsOption = None,
    assignments: SetOption = None,
    fractions: Annotated[str | None, typer.Option("--fractions", help="Labeled target fractions, e.g. 0,0.1,0.5,1.")] = None,
) -> None:
    """Train with labeled target scenes mixed into the source set, and on those scenes alone."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed, seeds=seeds, steps=steps, mix_fractions=fractions)
        rows = run_mixing_study(settings, out_root=out_directory(settings))
    for row in rows:
        score = f"{row.miou:.4f}" if row.miou is not None else "N/A"
        typer.echo(f"  f={row.fraction:<5g} {row.mode.value:<14} seed {row.seed}: {score}")


def sweep(
    method: Annotated[str, typer.Option("--method", "-m", help="Method to sweep.")] = "Ours(I+SP)",
    config: ConfigOption = None,
    out: OutOption = None,
    seed: SeedOption = None,
    seeds: SeedsOption = None,
    steps: StepsOption = None,
    assignments: SetOption = None,
    gammas: Annotated[str | None, typer.Option("--gammas", help="Gamma values, e.g. 0,0.5,1.")] = None,
    workers: WorkersOption = None,
) -> None:
    """Run one method over a list of gamma values."""
    with reported_errors():
        settings = load_config(config, assignments, out=out, seed=seed, seeds=seeds, steps=steps, gamma_sweep=gammas)
        results = run_gamma_sweep(settings, method, out_root=out_directory(settings), workers=workers)
    for gamma, summary in results.items():
        scores = ", ".join(f"{record['miou']:.4f}" if isinstance(record.get("miou"), float) else record["status"] for record in summary.records)
        typer.echo(f"  gamma {gamma:g}: {scores}")
    if not all(summary.ok for summary in results.values()):
        raise typer.Exit(1)


def fuse(
    method_a: Annotated[str, typer.Argument(help="Model whose selected classes take precedence.")],
    method_b: Annotated[str, typer.Argument(help="Model labeling the remaining pixels.")],
    seed_a: Annotated[int, typer.Option("--seed-a", help="Training seed of the first model.")] = 0,
    seed_b: Annotated[int, typer.Option("--seed-b", help="Training seed of the second model.")] = 0,
    config: ConfigOption = None,
    out: OutOption = None,
    assignments: SetOption = None,
) -> None:
    """Class-wise late fusion of two finished cells, selected on target validation and scored on target test.

    Without --config the effective config saved in --out is used.

    Examples:

        curda fuse "Ours(I+SP)" NoAdapt --seed-b 1 --out runs/default
    """
    if config is None and out is not None and (out / EFFECTIVE_CONFIG_NAME).exists():
        config = out / EFFECTIVE_CONFIG_NAME
    with reported_errors():
        settings = load_config(config, assignments, out=out)
        result = fuse_cells(settings, (method_a, seed_a), (method_b, seed_b), out_directory(settings))
    typer.echo(f"  {result.method_a}: {result.miou_a:.4f}")
    typer.echo(f"  {result.method_b}: {result.miou_b:.4f}")
    typer.echo(f"  fused: {result.miou_fused:.4f}")
