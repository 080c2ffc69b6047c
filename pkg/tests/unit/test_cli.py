"""Tests for the curda CLI."""

import json
from pathlib import Path

import pytest
import yaml
from assertpy import assert_that
from typer.testing import CliRunner

from curda.cli.main import app

runner = CliRunner()

QUICK_SETTINGS = {
    "seed": 7,
    "width": 16,
    "height": 16,
    "source_count": 6,
    "target_train_count": 4,
    "target_val_count": 3,
    "target_test_count": 3,
    "seeds": [0],
    "methods": ["NoAdapt"],
    "steps": 3,
    "src_batch": 2,
    "tgt_batch": 2,
    "no_adapt_batch": 3,
    "features": 4,
    "lr_epochs": 20,
    "sp_count": 8,
    "slic_iters": 3,
    "svm_epochs": 3,
}


@pytest.fixture
def quick_file(tmp_path: Path) -> Path:
    path = tmp_path / "quick.yml"
    path.write_text(yaml.safe_dump(QUICK_SETTINGS), encoding="utf-8")
    return path


class TestCurdaCli:
    """Tests for the main curda CLI."""

    def test_help_shows_commands(self) -> None:
        """curda --help lists every command."""
        result = runner.invoke(app, ["--help"])
        assert_that(result.exit_code).is_equal_to(0)
        for command in ("gen", "estimate", "superpix", "landmark", "train", "eval", "gradcheck", "experiment", "mix", "sweep", "fuse"):
            assert_that(result.stdout).contains(command)

    def test_no_args_shows_help(self) -> None:
        """curda with no args shows help."""
        result = runner.invoke(app, [])
        # Exit code 2 is expected for no_args_is_help=True
        assert_that(result.stdout).contains("Usage:")


class TestConfigErrors:
    """Tests for invalid configurations on the command line."""

    def test_out_of_range_value(self, tmp_path: Path) -> None:
        """A gamma outside [0, 1] exits with 1 and names the problem."""
        result = runner.invoke(app, ["experiment", "--out", str(tmp_path / "run"), "--set", "gamma=1.5"])
        assert_that(result.exit_code).is_equal_to(1)
        assert_that(result.output).contains("Error: invalid configuration")
        assert_that(result.output).contains("gamma")

    def test_unknown_key_in_file(self, tmp_path: Path) -> None:
        """Unknown keys in the config file are rejected."""
        path = tmp_path / "bad.yml"
        path.write_text("gamma: 0.5\nlearning_rate: 0.1\n", encoding="utf-8")
        result = runner.invoke(app, ["gen", "--config", str(path), "--out", str(tmp_path / "run")])
        assert_that(result.exit_code).is_equal_to(1)
        assert_that(result.output).contains("learning_rate")

    def test_unknown_method(self, tmp_path: Path) -> None:
        """An unknown method name exits with 1."""
        result = runner.invoke(app, ["experiment", "--out", str(tmp_path / "run"), "--methods", "Ours(XYZ)"])
        assert_that(result.exit_code).is_equal_to(1)
        assert_that(result.output).contains("Error:")


class TestCommands:
    """Tests running commands on a tiny benchmark."""

    def test_gen(self, tmp_path: Path, quick_file: Path) -> None:
        """gen reports the size of every split."""
        result = runner.invoke(app, ["gen", "--config", str(quick_file), "--out", str(tmp_path / "run")])
        assert_that(result.exit_code).is_equal_to(0)
        assert_that(result.stdout).contains("source_train: 6 scenes")
        assert_that(result.stdout).contains("target_test: 3 scenes")

    def test_gradcheck(self) -> None:
        """The analytic gradient of the full objective matches finite differences."""
        result = runner.invoke(app, ["gradcheck", "--coords", "30"])
        assert_that(result.exit_code).is_equal_to(0)
        assert_that(result.stdout).contains("max relative error")

    def test_experiment_then_fuse(self, tmp_path: Path, quick_file: Path) -> None:
        """experiment runs the grid; fuse reads the effective config saved next to the results."""
        out = tmp_path / "run"
        result = runner.invoke(app, ["experiment", "--config", str(quick_file), "--out", str(out), "--seeds", "0,1"])
        assert_that(result.exit_code).is_equal_to(0)
        assert_that(result.stdout).contains("NoAdapt")
        assert_that((out / "results.csv").exists()).is_true()

        fused = runner.invoke(app, ["fuse", "NoAdapt", "NoAdapt", "--seed-b", "1", "--out", str(out)])
        assert_that(fused.exit_code).is_equal_to(0)
        assert_that(fused.stdout).contains("fused:")
        assert_that(json.loads((out / "fusion.json").read_text(encoding="utf-8"))["b"]).is_equal_to("NoAdapt#1")

    def test_fuse_unfinished_cell(self, tmp_path: Path, quick_file: Path) -> None:
        """Fusing a cell that never ran exits with 1."""
        result = runner.invoke(app, ["fuse", "NoAdapt", "Ours(I)", "--config", str(quick_file), "--out", str(tmp_path / "run")])
        assert_that(result.exit_code).is_equal_to(1)
        assert_that(result.output).contains("has not finished")

    def test_train_then_eval(self, tmp_path: Path, quick_file: Path) -> None:
        """A checkpoint written by train can be scored by eval."""
        out = tmp_path / "run"
        trained = runner.invoke(app, ["train", "-m", "NoAdapt", "--config", str(quick_file), "--out", str(out)])
        assert_that(trained.exit_code).is_equal_to(0)
        checkpoint = out / "cells" / "NoAdapt__seed0" / "model.ckpt"
        assert_that(checkpoint.exists()).is_true()

        scored = runner.invoke(app, ["eval", str(checkpoint), "--config", str(quick_file), "--out", str(out)])
        assert_that(scored.exit_code).is_equal_to(0)
        assert_that(scored.stdout).contains("mIoU")
        report = json.loads((out / "eval.json").read_text(encoding="utf-8"))
        assert_that(report).contains_key("miou", "per_class", "confusion")
