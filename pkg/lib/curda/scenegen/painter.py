"""Layered procedural painter for one urban scene."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from curda.numerics import FloatArray, IntArray
from curda.rng import SplitMix64, derive_seed
from curda.scenegen.params import (
    BUILDING,
    CAR,
    INSTANCE_SHARES,
    NUM_CLASSES,
    PALETTE,
    PEDESTRIAN,
    POLE,
    ROAD,
    SIDEWALK,
    SKY,
    VEGETATION,
    Domain,
    DomainParams,
)

MIN_SIZE = 16
TEXTURE_AMPLITUDE = 0.08


@dataclass(frozen=True)
class Scene:
    """One generated image with its dense ground truth.

    ``image`` is (H, W, 3) in [0, 1]; ``mask`` is (H, W) with class ids.
    """

    image: FloatArray
    mask: IntArray
    id: int
    domain: Domain

    @property
    def height(self) -> int:
        return int(self.mask.shape[0])

    @property
    def width(self) -> int:
        return int(self.mask.shape[1])


@dataclass(frozen=True)
class _Layout:
    horizon_row: int
    road_top: int
    curb_height: int
    side_width: int
    skyline: IntArray


def _clip(value: float, low: float, high: float) -> float:
    return min(max(value, low), high)


def _sample_layout(rng: SplitMix64, params: DomainParams, width: int, height: int) -> _Layout:
    horizon = _clip(rng.normal_scalar(params.horizon_mean, params.horizon_std), 0.15, 0.55)
    horizon_row = round(horizon * height)
    road_frac = _clip(rng.normal_scalar(params.road_width_mean, params.road_width_std), 0.12, 0.5)
    max_road = height - horizon_row - max(2, height // 10)
    road_height = int(_clip(round(road_frac * height), 3, max_road))
    road_top = height - road_height
    curb_height = max(1, round(0.15 * road_height))
    side_width = max(1, round(0.08 * width))

    # Building blocks rise up to 15% of the height above the horizon.
    block_width = max(2, width // 6)
    blocks = math.ceil(width / block_width)
    rises = np.floor(rng.uniform(blocks) * 0.15 * height).astype(np.int64)
    skyline = np.repeat(horizon_row - rises, block_width)[:width]
    skyline = np.maximum(skyline, 0)
    return _Layout(horizon_row, road_top, curb_height, side_width, skyline)


def _instance_counts(rng: SplitMix64, density: float) -> dict[int, int]:
    draws = rng.uniform(len(INSTANCE_SHARES))
    return {cls: math.floor(density * share * (0.5 + float(u)) + 0.5) for (cls, share), u in zip(INSTANCE_SHARES.items(), draws, strict=True)}


def _paint_mask(rng: SplitMix64, layout: _Layout, params: DomainParams, width: int, height: int) -> IntArray:
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]
    mask = np.full((height, width), SKY, dtype=np.int64)
    counts = _instance_counts(rng, params.object_density)

    # sky
    mask[: layout.horizon_row, :] = SKY
    # building
    mask[(rows >= layout.skyline[None, :]) & (rows < layout.road_top)] = BUILDING
    # vegetation
    for _ in range(counts[VEGETATION]):
        u = rng.uniform(4)
        cx = u[0] * width
        cy = layout.horizon_row + u[1] * max(1, layout.road_top - layout.horizon_row)
        rx = (0.06 + 0.08 * u[2]) * width
        ry = (0.05 + 0.07 * u[3]) * height
        inside = ((cols - cx) / rx) ** 2 + ((rows - cy) / ry) ** 2 <= 1.0
        mask[inside & (rows < layout.road_top)] = VEGETATION
    # road
    mask[layout.road_top :, :] = ROAD
    # sidewalk: curb strip on top of the road band and strips at its left and right edges
    curb_bottom = layout.road_top + layout.curb_height
    mask[layout.road_top : curb_bottom, :] = SIDEWALK
    mask[layout.road_top :, : layout.side_width] = SIDEWALK
    mask[layout.road_top :, width - layout.side_width :] = SIDEWALK
    road_height = height - layout.road_top
    # car
    for _ in range(counts[CAR]):
        u = rng.uniform(4)
        car_w = max(2, round((0.12 + 0.13 * u[0]) * width))
        car_h = max(2, round((0.35 + 0.25 * u[1]) * road_height))
        top = layout.road_top + math.floor(u[2] * max(1, road_height - car_h + 1))
        left = math.floor(u[3] * max(1, width - car_w + 1))
        mask[top : top + car_h, left : left + car_w] = CAR
    # pedestrian, standing on the curb
    for _ in range(counts[PEDESTRIAN]):
        u = rng.uniform(3)
        ped_w = 1 + min(2, math.floor(u[0] * 3))
        ped_h = max(3, round((0.08 + 0.06 * u[1]) * height))
        bottom = curb_bottom - 1
        left = math.floor(u[2] * max(1, width - ped_w + 1))
        mask[max(0, bottom - ped_h + 1) : bottom + 1, left : left + ped_w] = PEDESTRIAN
    # pole
    for _ in range(counts[POLE]):
        u = rng.uniform(3)
        pole_w = 1 + min(1, math.floor(u[0] * 2))
        left = math.floor(u[1] * max(1, width - pole_w + 1))
        top = max(0, round(layout.horizon_row - 0.1 * height * u[2]))
        mask[top:curb_bottom, left : left + pole_w] = POLE
    return mask


def _render(rng: SplitMix64, mask: IntArray, params: DomainParams) -> FloatArray:
    height, width = mask.shape
    palette = np.asarray(PALETTE, dtype=np.float64)
    angles = rng.uniform(NUM_CLASSES) * math.pi
    phases = rng.uniform(NUM_CLASSES) * 2.0 * math.pi
    ys = (np.arange(height, dtype=np.float64) / height)[:, None]
    xs = (np.arange(width, dtype=np.float64) / width)[None, :]
    angle = angles[mask]
    phase = phases[mask]
    texture = 1.0 + TEXTURE_AMPLITUDE * np.sin(2.0 * math.pi * params.texture_freq * (xs * np.cos(angle) + ys * np.sin(angle)) + phase)
    image = palette[mask] * texture[..., None]
    image = image * np.asarray(params.tint, dtype=np.float64)
    noise = rng.normal(height * width * 3).reshape(height, width, 3)
    image = image + params.noise_sigma * noise
    return np.clip(image, 0.0, 1.0)


def generate_scene(
    seed: int,
    index: int,
    params: DomainParams,
    width: int,
    height: int,
    num_classes: int = NUM_CLASSES,
    domain: Domain = Domain.SOURCE,
) -> Scene:
    """
    Generate one scene from a dataset seed and a scene index.

    The scene's randomness derives only from (seed, index), so identical
    arguments always give bit-identical output and scenes can be generated
    in any order. Tint is applied before noise; clipping is the last step.

    Raises:
        ValueError: if width or height is below 16, or num_classes is not 8.
    """
    if width < MIN_SIZE or height < MIN_SIZE:
        msg = f"scene dimensions must be at least {MIN_SIZE}x{MIN_SIZE}, got {width}x{height}"
        raise ValueError(msg)
    if num_classes != NUM_CLASSES:
        msg = f"the class set is fixed at {NUM_CLASSES} classes, got {num_classes}"
        raise ValueError(msg)
    rng = SplitMix64(derive_seed(seed, index))
    layout = _sample_layout(rng, params, width, height)
    mask = _paint_mask(rng, layout, params, width, height)
    image = _render(rng, mask, params)
    return Scene(image=image, mask=mask, id=index, domain=domain)
