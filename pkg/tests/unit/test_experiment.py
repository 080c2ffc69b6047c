"""Tests for cached stages, grid cells, result files and the studies built on the grid."""

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from assertpy import assert_that

from curda.config import EFFECTIVE_CONFIG_NAME, ExperimentConfig
from curda.experiment import (
    DONE_MARKER,
    MixMode,
    benchmark_directory,
    cell_directory,
    cell_name,
    collect_records,
    content_hash,
    fuse_cells,
    is_done,
    labeled_count,
    load_or_generate_benchmark,
    load_predictions,
    parse_method,
    run_experiment,
    run_gamma_sweep,
    run_mixing_study,
    summarize,
    train_config_for,
)
from curda.experiment.cells import save_predictions
from curda.experiment.stages import DATA_KEYS


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TestStages:
    """Tests for the content-addressed stage cache."""

    def test_hash_covers_only_its_keys(self, quick_config: ExperimentConfig) -> None:
        """Changing a training key keeps the data hash; changing the seed does not."""
        base = content_hash(quick_config, DATA_KEYS)
        assert_that(content_hash(quick_config.with_overrides({"steps": 99}), DATA_KEYS)).is_equal_to(base)
        assert_that(content_hash(quick_config.with_overrides({"seed": 8}), DATA_KEYS)).is_not_equal_to(base)
        assert_that(base).is_length(16)

    def test_benchmark_is_cached(self, tmp_path: Path, quick_config: ExperimentConfig) -> None:
        """The second call loads the generated benchmark from disk."""
        first = load_or_generate_benchmark(quick_config, tmp_path)
        directory = benchmark_directory(quick_config, tmp_path)
        assert_that((directory / DONE_MARKER).exists()).is_true()
        second = load_or_generate_benchmark(quick_config, tmp_path)
        assert_that(second.target_test.images[0].tobytes()).is_equal_to(first.target_test.images[0].tobytes())
        assert_that(tuple(second.target_train.params.tint)).is_equal_to(tuple(quick_config.target_tint))


class TestCells:
    """Tests for single grid cells."""

    def test_cell_names(self) -> None:
        """Cell directories are named after the method slug and the seed."""
        spec = parse_method("Ours(CC+I+SP)")
        assert_that(cell_name(spec, 3)).is_equal_to("Ours_CC-I-SP__seed3")
        assert_that(cell_directory(Path("out"), spec, 3)).is_equal_to(Path("out/cells/Ours_CC-I-SP__seed3"))

    def test_train_configs(self, quick_config: ExperimentConfig) -> None:
        """NoAdapt trains on source batches only; Ours uses the grid's gamma and batches."""
        no_adapt = train_config_for(quick_config, parse_method("NoAdapt"), 4)
        assert_that((no_adapt.gamma, no_adapt.src_batch, no_adapt.tgt_batch, no_adapt.seed)).is_equal_to((1.0, 3, 0, 4))
        ours = train_config_for(quick_config, parse_method("Ours(CC+SP)"), 1)
        assert_that((ours.gamma, ours.src_batch, ours.tgt_batch)).is_equal_to((0.5, 2, 2))
        assert_that((ours.use_image_term, ours.use_sp_term, ours.use_cc)).is_equal_to((False, True, True))

    def test_predictions_file(self, tmp_path: Path) -> None:
        """Prediction bundles keep the scene order."""
        masks = [np.full((2, 2), value, dtype=np.int64) for value in (3, 1, 255)]
        loaded = load_predictions(save_predictions(tmp_path / "preds.cda", masks))
        assert_that([int(mask[0, 0]) for mask in loaded]).is_equal_to([3, 1, 255])


class TestGrid:
    """Tests for run_experiment and its result files."""

    def test_single_cell(self, quick_config: ExperimentConfig) -> None:
        """One method and one seed give exactly one result row and all artifacts."""
        summary = run_experiment(quick_config)
        out = Path(quick_config.out)
        assert_that(summary.ok).is_true()
        assert_that(summary.records).is_length(1)
        record = summary.records[0]
        assert_that(record).contains_entry({"method": "NoAdapt"}, {"seed": 0}, {"status": "ok"})
        assert_that(record["per_class"]).contains_key("road", "sky", "pedestrian")
        cell = cell_directory(out, parse_method("NoAdapt"), 0)
        for name in ("model.ckpt", "history.csv", "preds_val.cda", "preds_test.cda", "confusion_normalized.csv", "result.json", "timing.json", DONE_MARKER):
            assert_that((cell / name).exists()).described_as(name).is_true()
        rows = read_csv(out / "results.csv")
        assert_that(rows).is_length(1)
        assert_that(rows[0]["method"]).is_equal_to("NoAdapt")
        assert_that(read_csv(out / "chi2.csv")).is_length(4)
        assert_that((out / EFFECTIVE_CONFIG_NAME).exists()).is_true()

    def test_rerun_is_idempotent(self, quick_config: ExperimentConfig) -> None:
        """A second run trains nothing and rewrites identical result files."""
        out = Path(quick_config.out)
        run_experiment(quick_config)
        before = {name: (out / name).read_bytes() for name in ("results.jsonl", "results.csv", "timings.csv", "summary.json")}
        checkpoint = cell_directory(out, parse_method("NoAdapt"), 0) / "model.ckpt"
        stamp = checkpoint.stat().st_mtime_ns
        run_experiment(quick_config)
        after = {name: (out / name).read_bytes() for name in before}
        assert_that(after).is_equal_to(before)
        assert_that(checkpoint.stat().st_mtime_ns).is_equal_to(stamp)

    def test_wall_clock_only_in_timings(self, quick_config: ExperimentConfig) -> None:
        """Result records carry no timing; timings.csv does."""
        run_experiment(quick_config)
        out = Path(quick_config.out)
        record = json.loads((out / "results.jsonl").read_text(encoding="utf-8").splitlines()[0])
        assert_that(record).does_not_contain_key("wall_clock_s")
        timing = read_csv(out / "timings.csv")[0]
        assert_that(float(timing["wall_clock_s"])).is_greater_than(0.0)

    def test_adaptation_and_superpixel_methods(self, quick_config: ExperimentConfig) -> None:
        """Curriculum and superpixel cells run side by side and report landmark diagnostics per CC setting."""
        config = quick_config.with_overrides({"methods": ["Ours(I+SP)", "SPLndmk(CC)", "SP"]})
        summary = run_experiment(config)
        out = Path(config.out)
        assert_that(summary.ok).is_true()
        assert_that([record["method"] for record in summary.records]).is_equal_to(["Ours(I+SP)", "SP", "SPLndmk(CC)"])
        diagnostics = json.loads((out / "landmarks_diag.json").read_text(encoding="utf-8"))
        assert_that(diagnostics).contains_key("plain", "cc")
        assert_that(diagnostics["plain"]).contains_key("svm_train_accuracy", "landmarks", "top_curve")
        sp = cell_directory(out, parse_method("SP"), 0)
        assert_that((sp / "model.ckpt").exists()).is_false()
        test_preds = load_predictions(sp / "preds_test.cda")
        assert_that(test_preds).is_length(3)

    def test_failed_cell_is_retried(self, quick_config: ExperimentConfig, monkeypatch: pytest.MonkeyPatch) -> None:
        """A failing cell is recorded without a marker and runs again next time."""
        config = quick_config.with_overrides({"seeds": [0, 1]})
        out = Path(config.out)
        spec = parse_method("NoAdapt")
        import curda.experiment.grid as grid

        original = grid.run_cell

        def flaky(config: ExperimentConfig, spec: Any, seed: int, out_root: Path) -> dict[str, Any]:
            if seed == 1:
                msg = "simulated failure"
                raise RuntimeError(msg)
            return original(config, spec, seed, out_root)

        monkeypatch.setattr(grid, "run_cell", flaky)
        summary = run_experiment(config, workers=1)
        assert_that(summary.ok).is_false()
        assert_that([record["seed"] for record in summary.failed]).is_equal_to([1])
        assert_that(summary.failed[0]["error"]).contains("simulated failure")
        assert_that(is_done(out, spec, 1)).is_false()
        assert_that(json.loads((out / "summary.json").read_text(encoding="utf-8"))["methods"]["NoAdapt"]["failed_seeds"]).is_equal_to([1])

        monkeypatch.setattr(grid, "run_cell", original)
        assert_that(run_experiment(config, workers=1).ok).is_true()
        assert_that(is_done(out, spec, 1)).is_true()

    def test_collect_orders_by_method_and_seed(self, tmp_path: Path) -> None:
        """Cells that never ran are reported as failed, in sorted order."""
        specs = [parse_method("Ours(I)"), parse_method("NoAdapt")]
        records = collect_records(tmp_path, specs, (2, 0))
        assert_that([(record["method"], record["seed"]) for record in records]).is_equal_to([("NoAdapt", 0), ("NoAdapt", 2), ("Ours(I)", 0), ("Ours(I)", 2)])
        assert_that({record["status"] for record in records}).is_equal_to({"failed"})


class TestSummary:
    """Tests for summary statistics."""

    def test_medians_and_wins(self) -> None:
        """Medians skip failed seeds and undefined classes; wins compare per-class medians."""
        records = [
            {"method": "A", "seed": 0, "status": "ok", "miou": 0.4, "per_class": {"x": 0.2, "y": 0.6}},
            {"method": "A", "seed": 1, "status": "ok", "miou": 0.6, "per_class": {"x": 0.4, "y": None}},
            {"method": "A", "seed": 2, "status": "failed"},
            {"method": "B", "seed": 0, "status": "ok", "miou": 0.5, "per_class": {"x": 0.5, "y": 0.5}},
        ]
        summary = summarize(records, ["x", "y"])
        a = summary["methods"]["A"]
        assert_that(a["seeds"]).is_equal_to([0, 1])
        assert_that(a["failed_seeds"]).is_equal_to([2])
        assert_that(a["median_miou"]).is_close_to(0.5, 1e-12)
        assert_that(a["per_class_median"][0]).is_close_to(0.3, 1e-12)
        assert_that(a["per_class_median"][1]).is_close_to(0.6, 1e-12)
        assert_that(summary["win_matrix"]).is_equal_to({"A": [0, 1], "B": [1, 0]})
        assert_that(summary["pairwise_wins"]).is_equal_to({"A": {"B": 1}, "B": {"A": 1}})


class TestStudies:
    """Tests for the mixing study, the gamma sweep and late fusion."""

    def test_mixing_without_labels_matches_no_adapt(self, quick_config: ExperimentConfig) -> None:
        """f=0 with source data equals NoAdapt; the target-only run has nothing to train on."""
        record = run_experiment(quick_config).records[0]
        rows = run_mixing_study(quick_config, [0.0, 0.5])
        assert_that([(row.fraction, row.mode, row.labeled, row.status) for row in rows]).is_equal_to(
            [
                (0.0, MixMode.SOURCE_AND_TARGET, 0, "ok"),
                (0.0, MixMode.TARGET_ONLY, 0, "n/a"),
                (0.5, MixMode.SOURCE_AND_TARGET, 2, "ok"),
                (0.5, MixMode.TARGET_ONLY, 2, "ok"),
            ]
        )
        assert_that(rows[0].miou).is_equal_to(record["miou"])
        assert_that(read_csv(Path(quick_config.out) / "mixing.csv")).is_length(4)

    def test_labeled_count(self) -> None:
        """Fractions round up to whole scenes."""
        assert_that(labeled_count(0.1, 100)).is_equal_to(10)
        assert_that(labeled_count(0.2, 4)).is_equal_to(1)
        assert_that(labeled_count(0.0, 4)).is_equal_to(0)

    def test_mixing_rejects_bad_fraction(self, quick_config: ExperimentConfig) -> None:
        """Fractions must lie in [0, 1]."""
        with pytest.raises(ValueError, match="fractions"):
            run_mixing_study(quick_config, [1.5])

    def test_gamma_sweep(self, quick_config: ExperimentConfig) -> None:
        """Every gamma gets its own grid directory and one sweep row per seed."""
        results = run_gamma_sweep(quick_config, "Ours(I)", [0.0, 1.0])
        out = Path(quick_config.out)
        assert_that(list(results)).is_equal_to([0.0, 1.0])
        assert_that(all(summary.ok for summary in results.values())).is_true()
        assert_that((out / "sweep" / "gamma_0" / "results.csv").exists()).is_true()
        assert_that((out / "sweep" / "gamma_1" / "results.csv").exists()).is_true()
        rows = read_csv(out / "sweep.csv")
        assert_that([(row["gamma"], row["method"]) for row in rows]).is_equal_to([("0.0", "Ours(I)"), ("1.0", "Ours(I)")])

    def test_fusion(self, quick_config: ExperimentConfig) -> None:
        """Fusing a cell with itself keeps its score; unfinished cells are refused."""
        config = quick_config.with_overrides({"seeds": [0, 1]})
        run_experiment(config)
        same = fuse_cells(config, ("NoAdapt", 0), ("NoAdapt", 0))
        assert_that(same.miou_fused).is_equal_to(same.miou_a)
        mixed = fuse_cells(config, ("NoAdapt", 0), ("NoAdapt", 1))
        assert_that(mixed.method_b).is_equal_to("NoAdapt#1")
        assert_that(json.loads((Path(config.out) / "fusion.json").read_text(encoding="utf-8"))).contains_key("selection", "miou_fused")
        with pytest.raises(FileNotFoundError, match="has not finished"):
            fuse_cells(config, ("NoAdapt", 0), ("Ours(I)", 0))
