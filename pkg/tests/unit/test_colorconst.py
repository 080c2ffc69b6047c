"""Tests for diagonal color calibration."""

import json
from pathlib import Path

import numpy as np
import pytest
from assertpy import assert_that

from curda.colorconst import GAIN_MAX, ColorStats, calibrate, calibrate_images, channel_gains, fit_calibration, fit_color_stats
from curda.rng import SplitMix64


def stats(mean: list[float]) -> ColorStats:
    return ColorStats(mean=np.asarray(mean, dtype=np.float64), p95=np.asarray(mean, dtype=np.float64))


class TestColorStats:
    """Tests for pooled color statistics."""

    def test_constant_image(self) -> None:
        """A constant image has mean and percentile equal to its value."""
        image = np.empty((4, 5, 3))
        image[...] = [0.2, 0.4, 0.6]
        result = fit_color_stats([image, image])
        assert_that(bool(np.allclose(result.mean, [0.2, 0.4, 0.6]))).is_true()
        assert_that(bool(np.allclose(result.p95, [0.2, 0.4, 0.6]))).is_true()

    def test_empty(self) -> None:
        """There are no statistics without images."""
        with pytest.raises(ValueError, match="empty"):
            fit_color_stats([])

    def test_dict_roundtrip(self) -> None:
        """from_dict inverts to_dict."""
        original = ColorStats(mean=np.array([0.1, 0.2, 0.3]), p95=np.array([0.5, 0.6, 0.7]))
        restored = ColorStats.from_dict(original.to_dict())
        assert_that(restored.mean.tolist()).is_equal_to(original.mean.tolist())
        assert_that(restored.p95.tolist()).is_equal_to(original.p95.tolist())


class TestCalibration:
    """Tests for channel gains and calibrated images."""

    def test_identity(self) -> None:
        """Matching statistics leave the image unchanged."""
        image = SplitMix64(1).uniform(6 * 6 * 3).reshape(6, 6, 3)
        same = stats([0.3, 0.5, 0.4])
        assert_that(np.array_equal(calibrate(image, same, same), image)).is_true()

    def test_undoes_diagonal_tint(self) -> None:
        """A red gain of 0.5 is undone by calibrating toward the untinted statistics."""
        images = [SplitMix64(seed).uniform(8 * 8 * 3).reshape(8, 8, 3) for seed in range(3)]
        tinted = [image * np.array([0.5, 1.0, 1.0]) for image in images]
        record = fit_calibration(images, tinted)
        assert_that(bool(np.allclose(record.gains, [2.0, 1.0, 1.0]))).is_true()
        restored = calibrate_images(tinted, record.target, record.reference)
        assert_that(bool(np.allclose(restored[0], images[0]))).is_true()

    def test_calibrated_means_match_reference(self) -> None:
        """Calibrated target-train channel means land within 0.02 of the reference means."""
        reference = [0.6 * SplitMix64(seed).uniform(8 * 8 * 3).reshape(8, 8, 3) for seed in range(4)]
        target = [0.6 * SplitMix64(seed + 10).uniform(8 * 8 * 3).reshape(8, 8, 3) * np.array([0.85, 1.05, 0.9]) for seed in range(4)]
        record = fit_calibration(reference, target)
        calibrated = fit_color_stats(calibrate_images(target, record.target, record.reference))
        assert_that(float(np.abs(calibrated.mean - record.reference.mean).max())).is_less_than_or_equal_to(0.02)

    def test_gain_clamp(self) -> None:
        """Gains are clamped to [0.25, 4]."""
        gains = channel_gains(stats([0.01, 0.5, 0.9]), stats([0.9, 0.5, 0.01]))
        assert_that(gains.tolist()).is_equal_to([GAIN_MAX, 1.0, 0.25])

    def test_output_is_clipped(self) -> None:
        """Calibrated values never exceed 1."""
        image = np.full((2, 2, 3), 0.8)
        result = calibrate(image, stats([0.4, 0.4, 0.4]), stats([0.8, 0.8, 0.8]))
        assert_that(float(result.max())).is_equal_to(1.0)

    def test_zero_channel(self) -> None:
        """A zero-mean channel has no gain."""
        with pytest.raises(ValueError, match="zero-mean"):
            channel_gains(stats([0.0, 0.5, 0.5]), stats([0.5, 0.5, 0.5]))

    def test_record_file(self, tmp_path: Path) -> None:
        """The calibration record is written as JSON."""
        image = np.full((2, 2, 3), 0.5)
        path = fit_calibration([image], [image]).save(tmp_path / "cc.json")
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert_that(payload).contains_key("reference", "target", "gains")
        assert_that(payload["gains"]).is_equal_to([1.0, 1.0, 1.0])
