"""Options shared by the experiment commands and the config they build."""

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import typer

from curda.config import ExperimentConfig, parse_assignments, parse_config
from curda.errors import ConfigError

ConfigOption = Annotated[Path | None, typer.Option("--config", "-c", help="YAML config file (key: value lines).", dir_okay=False)]
OutOption = Annotated[Path | None, typer.Option("--out", "-o", help="Output directory.")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Dataset seed.")]
SeedsOption = Annotated[str | None, typer.Option("--seeds", help="Training seeds, e.g. 0,1,2.")]
MethodsOption = Annotated[str | None, typer.Option("--methods", help="Methods, e.g. NoAdapt,Ours(CC+I+SP).")]
CCOption = Annotated[bool | None, typer.Option("--cc/--no-cc", help="Force color constancy on or off for every method.")]
GammaOption = Annotated[float | None, typer.Option("--gamma", help="Weight of the source loss, in [0, 1].")]
SpCountOption = Annotated[int | None, typer.Option("--sp-count", help="Superpixels per image.")]
RatioOption = Annotated[float | None, typer.Option("--landmark-ratio", help="Fraction of target superpixels kept as landmarks.")]
EstimatorOption = Annotated[str | None, typer.Option("--estimator", help="Label-distribution estimator: lr, nn, mean or uniform.")]
StepsOption = Annotated[int | None, typer.Option("--steps", help="Training steps.")]
SetOption = Annotated[list[str] | None, typer.Option("--set", help="Override any config key, e.g. --set k=4. Can be repeated.")]
WorkersOption = Annotated[int | None, typer.Option("--workers", "-j", help="Worker processes (capped by CDA_THREADS).")]


def load_config(config: Path | None, assignments: list[str] | None, **flags: Any) -> ExperimentConfig:
    """Defaults, then the file, then ``--set`` values, then dedicated flags."""
    if isinstance(flags.get("out"), Path):
        flags["out"] = str(flags["out"])
    return parse_config(config, parse_assignments(assignments or []), flags)


def out_directory(settings: ExperimentConfig) -> Path:
    return Path(settings.out)


@contextmanager
def reported_errors() -> Iterator[None]:
    """Turn domain errors into ``Error: ...`` on stderr and exit code 1."""
    try:
        yield
    except typer.Exit:
        raise
    except ConfigError as e:
        typer.echo(f"Error: invalid configuration: {e}", err=True)
        raise typer.Exit(1) from None
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(1) from None
