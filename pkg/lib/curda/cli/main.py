"""Main curda CLI entry point."""

import logging
from typing import Annotated

import typer

from curda.cli.data import estimate, gen, landmark, superpix
from curda.cli.grid import experiment, fuse, mix, sweep
from curda.cli.model import evaluate, gradcheck, train

app = typer.Typer(
    name="curda",
    help="curda - curriculum domain adaptation for semantic segmentation on synthetic urban scenes.",
    no_args_is_help=True,
)


@app.callback()
def root(
    verbose: Annotated[
        bool,
        typer.Option(
            "--verbose",
            "-v",
            help="Show debug logging.",
        ),
    ] = False,
) -> None:
    """Configure logging for every command."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


app.command()(gen)
app.command()(estimate)
app.command()(superpix)
app.command()(landmark)
app.command()(train)
app.command("eval")(evaluate)
app.command()(gradcheck)
app.command()(experiment)
app.command()(mix)
app.command()(sweep)
app.command()(fuse)


def main() -> None:
    """Entry point for the curda CLI."""
    app()


if __name__ == "__main__":
    main()
