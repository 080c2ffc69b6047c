"""Datasets of generated scenes, benchmark splits, and their on-disk layout."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from curda.io import load_bundle, save_bundle
from curda.numerics import FloatArray, IntArray
from curda.parallel import worker_count
from curda.rng import derive_seed
from curda.scenegen.painter import Scene, generate_scene
from curda.scenegen.params import CLASS_NAMES, NUM_CLASSES, Domain, DomainKind, DomainParams, default_domain_params

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

SOURCE_TRAIN = "source_train"
TARGET_TRAIN = "target_train"
TARGET_VAL = "target_val"
TARGET_TEST = "target_test"
SPLIT_NAMES: tuple[str, ...] = (SOURCE_TRAIN, TARGET_TRAIN, TARGET_VAL, TARGET_TEST)


@dataclass(frozen=True)
class Dataset:
    """An ordered list of scenes plus everything needed to regenerate them."""

    scenes: list[Scene]
    params: DomainParams
    seed: int
    width: int
    height: int
    domain: Domain = Domain.SOURCE
    class_names: tuple[str, ...] = CLASS_NAMES

    def __len__(self) -> int:
        return len(self.scenes)

    @property
    def images(self) -> list[FloatArray]:
        return [scene.image for scene in self.scenes]

    @property
    def masks(self) -> list[IntArray]:
        return [scene.mask for scene in self.scenes]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def subset(self, count: int) -> Dataset:
        """The first ``count`` scenes."""
        return Dataset(self.scenes[:count], self.params, self.seed, self.width, self.height, self.domain, self.class_names)

    def with_images(self, images: list[FloatArray]) -> Dataset:
        """Same scenes with replaced images (masks untouched)."""
        if len(images) != len(self.scenes):
            msg = f"expected {len(self.scenes)} images, got {len(images)}"
            raise ValueError(msg)
        scenes = [Scene(image=image, mask=scene.mask, id=scene.id, domain=scene.domain) for scene, image in zip(self.scenes, images, strict=True)]
        return Dataset(scenes, self.params, self.seed, self.width, self.height, self.domain, self.class_names)

    def manifest(self) -> dict[str, Any]:
        return {
            "format_version": MANIFEST_VERSION,
            "seed": self.seed,
            "domain": self.domain.value,
            "params": self.params.to_dict(),
            "count": len(self.scenes),
            "width": self.width,
            "height": self.height,
            "class_names": list(self.class_names),
            "scenes": [_scene_file(scene.id) for scene in self.scenes],
        }


def generate_dataset(
    seed: int,
    params: DomainParams,
    count: int,
    width: int,
    height: int,
    *,
    domain: Domain = Domain.SOURCE,
    workers: int | None = None,
) -> Dataset:
    """
    Generate ``count`` scenes indexed 0..count-1.

    Scenes may be painted on several threads; the result does not depend on
    the number of workers because each scene only depends on (seed, index).
    """
    if count < 1:
        msg = f"count must be at least 1, got {count}"
        raise ValueError(msg)

    def make(index: int) -> Scene:
        return generate_scene(seed, index, params, width, height, NUM_CLASSES, domain)

    threads = worker_count(workers)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scenes = list(pool.map(make, range(count)))
    else:
        scenes = [make(index) for index in range(count)]
    logger.debug("Generated %d %s scenes (seed=%d, %dx%d)", count, domain.value, seed, width, height)
    return Dataset(scenes, params, seed, width, height, domain)


@dataclass(frozen=True)
class SplitCounts:
    source_train: int = 200
    target_train: int = 100
    target_val: int = 50
    target_test: int = 50


@dataclass(frozen=True)
class Benchmark:
    """Source training set plus the three target splits."""

    source_train: Dataset
    target_train: Dataset
    target_val: Dataset
    target_test: Dataset

    def split(self, name: str) -> Dataset:
        match name:
            case "source_train":
                return self.source_train
            case "target_train":
                return self.target_train
            case "target_val":
                return self.target_val
            case "target_test":
                return self.target_test
            case _:
                msg = f"unknown split {name!r}; expected one of {', '.join(SPLIT_NAMES)}"
                raise ValueError(msg)


def generate_benchmark(
    seed: int,
    counts: SplitCounts,
    width: int,
    height: int,
    *,
    source_params: DomainParams | None = None,
    target_params: DomainParams | None = None,
    workers: int | None = None,
) -> Benchmark:
    """Generate all four splits; each split's seed is derived from ``seed`` and its name."""
    source = source_params or default_domain_params(DomainKind.SOURCE_LIKE)
    target = target_params or default_domain_params(DomainKind.TARGET_LIKE)

    def split(name: str, params: DomainParams, count: int, domain: Domain) -> Dataset:
        return generate_dataset(derive_seed(seed, name), params, count, width, height, domain=domain, workers=workers)

    return Benchmark(
        source_train=split(SOURCE_TRAIN, source, counts.source_train, Domain.SOURCE),
        target_train=split(TARGET_TRAIN, target, counts.target_train, Domain.TARGET),
        target_val=split(TARGET_VAL, target, counts.target_val, Domain.TARGET),
        target_test=split(TARGET_TEST, target, counts.target_test, Domain.TARGET),
    )


def _scene_file(index: int) -> str:
    return f"scene_{index:05d}.cda"


def save_dataset(dataset: Dataset, directory: Path) -> Path:
    """Write ``manifest.json`` plus one bundle (``IMG ``, ``MASK``) per scene."""
    directory.mkdir(parents=True, exist_ok=True)
    for scene in dataset.scenes:
        save_bundle(directory / _scene_file(scene.id), {"IMG ": scene.image, "MASK": scene.mask})
    manifest_path = directory / MANIFEST_NAME
    manifest_path.write_text(json.dumps(dataset.manifest(), indent=2, sort_keys=True), encoding="utf-8")
    return manifest_path


def load_dataset(directory: Path) -> Dataset:
    """Read a dataset directory written by ``save_dataset``."""
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        msg = f"no {MANIFEST_NAME} in {directory}"
        raise FileNotFoundError(msg)
    manifest: dict[str, Any] = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format_version") != MANIFEST_VERSION:
        msg = f"unsupported manifest version {manifest.get('format_version')!r} in {manifest_path}"
        raise ValueError(msg)
    domain = Domain(manifest["domain"])
    scenes: list[Scene] = []
    for index, name in enumerate(manifest["scenes"]):
        sections = load_bundle(directory / name)
        image = np.asarray(sections["IMG "], dtype=np.float64)
        mask = np.asarray(sections["MASK"], dtype=np.int64)
        scenes.append(Scene(image=image, mask=mask, id=index, domain=domain))
    return Dataset(
        scenes=scenes,
        params=DomainParams.from_dict(manifest["params"]),
        seed=int(manifest["seed"]),
        width=int(manifest["width"]),
        height=int(manifest["height"]),
        domain=domain,
        class_names=tuple(manifest["class_names"]),
    )


def save_benchmark(benchmark: Benchmark, directory: Path) -> None:
    for name in SPLIT_NAMES:
        save_dataset(benchmark.split(name), directory / name)


def load_benchmark(directory: Path) -> Benchmark:
    return Benchmark(*(load_dataset(directory / name) for name in SPLIT_NAMES))
