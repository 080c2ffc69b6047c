"""Target-to-source color calibration."""

from curda.colorconst.calibration import (
    GAIN_MAX,
    GAIN_MIN,
    CalibrationRecord,
    ColorStats,
    calibrate,
    calibrate_images,
    channel_gains,
    fit_calibration,
    fit_color_stats,
)

__all__ = [
    "GAIN_MAX",
    "GAIN_MIN",
    "CalibrationRecord",
    "ColorStats",
    "calibrate",
    "calibrate_images",
    "channel_gains",
    "fit_calibration",
    "fit_color_stats",
]
