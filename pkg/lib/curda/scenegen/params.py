"""Class set, palette and domain-shift parameters for the scene generator."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import StrEnum
from typing import Any

CLASS_NAMES: tuple[str, ...] = (
    "road",
    "sidewalk",
    "sky",
    "building",
    "car",
    "vegetation",
    "pole",
    "pedestrian",
)
NUM_CLASSES = len(CLASS_NAMES)

ROAD, SIDEWALK, SKY, BUILDING, CAR, VEGETATION, POLE, PEDESTRIAN = range(NUM_CLASSES)

# Later painters overwrite earlier ones.
PAINTER_ORDER: tuple[int, ...] = (SKY, BUILDING, VEGETATION, ROAD, SIDEWALK, CAR, PEDESTRIAN, POLE)

# Base RGB per class, before texture, tint and noise.
PALETTE: tuple[tuple[float, float, float], ...] = (
    (0.40, 0.40, 0.44),  # road
    (0.66, 0.60, 0.54),  # sidewalk
    (0.56, 0.74, 0.94),  # sky
    (0.58, 0.46, 0.40),  # building
    (0.78, 0.16, 0.16),  # car
    (0.24, 0.54, 0.20),  # vegetation
    (0.16, 0.16, 0.20),  # pole
    (0.86, 0.58, 0.44),  # pedestrian
)

# Share of object_density spent on each instance class.
INSTANCE_SHARES: dict[int, float] = {CAR: 0.35, POLE: 0.25, PEDESTRIAN: 0.20, VEGETATION: 0.20}


class Domain(StrEnum):
    SOURCE = "source"
    TARGET = "target"


class DomainKind(StrEnum):
    SOURCE_LIKE = "source-like"
    TARGET_LIKE = "target-like"


@dataclass(frozen=True)
class DomainParams:
    """Priors that control layout, appearance and the size of the domain shift.

    Fractions are relative to the image height.
    """

    tint: tuple[float, float, float] = (1.0, 1.0, 1.0)
    noise_sigma: float = 0.01
    horizon_mean: float = 0.30
    horizon_std: float = 0.04
    road_width_mean: float = 0.30
    road_width_std: float = 0.04
    object_density: float = 6.0
    texture_freq: float = 3.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if len(self.tint) != 3 or any(not (0.0 < gain <= 2.0) for gain in self.tint):
            msg = f"tint gains must lie in (0, 2], got {self.tint}"
            raise ValueError(msg)
        if not 0.0 <= self.noise_sigma <= 0.2:
            msg = f"noise_sigma must lie in [0, 0.2], got {self.noise_sigma}"
            raise ValueError(msg)
        if not 0.1 < self.horizon_mean < 0.6:
            msg = f"horizon_mean must lie in (0.1, 0.6), got {self.horizon_mean}"
            raise ValueError(msg)
        if not 0.05 <= self.road_width_mean <= 0.5:
            msg = f"road_width_mean must lie in [0.05, 0.5], got {self.road_width_mean}"
            raise ValueError(msg)
        if self.horizon_std < 0 or self.road_width_std < 0:
            msg = "prior standard deviations must be non-negative"
            raise ValueError(msg)
        if self.object_density < 0 or self.texture_freq < 0:
            msg = "object_density and texture_freq must be non-negative"
            raise ValueError(msg)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["tint"] = list(self.tint)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DomainParams:
        values = dict(data)
        tint = values.pop("tint", (1.0, 1.0, 1.0))
        return cls(tint=(float(tint[0]), float(tint[1]), float(tint[2])), **{k: float(v) for k, v in values.items()})


def default_domain_params(kind: DomainKind | str) -> DomainParams:
    """The fixed reference shift between the two domains.

    SourceLike is neutral; TargetLike is tinted, noisier, has a lower horizon,
    wider roads and finer texture.
    """
    match DomainKind(kind):
        case DomainKind.SOURCE_LIKE:
            return DomainParams()
        case DomainKind.TARGET_LIKE:
            return DomainParams(
                tint=(0.85, 1.05, 0.90),
                noise_sigma=0.05,
                horizon_mean=0.38,
                horizon_std=0.05,
                road_width_mean=0.36,
                road_width_std=0.05,
                object_density=6.0,
                texture_freq=6.0,
            )
