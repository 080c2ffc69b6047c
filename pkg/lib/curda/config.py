"""Experiment configuration: documented defaults, `key = value` files and command-line overrides."""

from __future__ import annotations

import logging
import math
import re
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, cast

import yaml

from curda.errors import ConfigError
from curda.labeldist import EstimatorKind

logger = logging.getLogger(__name__)

EFFECTIVE_CONFIG_NAME = "config.effective.yml"

DEFAULT_METHODS: tuple[str, ...] = (
    "NoAdapt",
    "NoAdapt(CC)",
    "Ours(I)",
    "Ours(CC+I)",
    "Ours(SP)",
    "Ours(CC+SP)",
    "Ours(I+SP)",
    "Ours(CC+I+SP)",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a grid run depends on. Field names are the config file keys."""

    # datasets
    seed: int = 0
    width: int = 64
    height: int = 64
    source_count: int = 200
    target_train_count: int = 100
    target_val_count: int = 50
    target_test_count: int = 50
    target_tint: tuple[float, ...] = (0.85, 1.05, 0.90)

    # grid
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    methods: tuple[str, ...] = DEFAULT_METHODS
    cc: bool | None = None
    out: str = "runs/default"

    # training
    gamma: float = 0.5
    k: float = 6.0
    steps: int = 2000
    src_batch: int = 5
    tgt_batch: int = 5
    no_adapt_batch: int = 15
    features: int = 8
    checkpoint_every: int = 0

    # global label distributions
    estimator: str = "lr"
    nn_k: int = 5
    lr_epochs: int = 2000
    lr_rate: float = 0.05

    # superpixels and landmarks
    sp_count: int = 100
    compactness: float = 10.0
    slic_iters: int = 10
    probe_scale: float = 1.0
    landmark_ratio: float = 0.3
    landmark_per_image: bool = False
    svm_lambda: float = 1e-3
    svm_epochs: int = 200

    # studies
    mix_fractions: tuple[float, ...] = (0.0, 0.1, 0.2, 0.5, 1.0)
    gamma_sweep: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        positive = ("width", "height", "source_count", "target_train_count", "target_val_count", "target_test_count", "features", "nn_k", "sp_count", "slic_iters", "svm_epochs")
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be >= 1, got {getattr(self, key)}")
        if self.width < 16 or self.height < 16:
            raise ConfigError("width" if self.width < 16 else "height", "scenes must be at least 16 pixels on each side")
        for key in ("steps", "src_batch", "tgt_batch", "lr_epochs", "checkpoint_every"):
            if getattr(self, key) < 0:
                raise ConfigError(key, f"must be >= 0, got {getattr(self, key)}")
        if self.no_adapt_batch < 1:
            raise ConfigError("no_adapt_batch", f"must be >= 1, got {self.no_adapt_batch}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma", f"must lie in [0, 1], got {self.gamma}")
        if self.k < 1.0:
            raise ConfigError("k", f"must be >= 1, got {self.k}")
        if not 0.0 <= self.landmark_ratio <= 1.0:
            raise ConfigError("landmark_ratio", f"must lie in [0, 1], got {self.landmark_ratio}")
        for key in ("lr_rate", "compactness", "probe_scale", "svm_lambda"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(key, f"must be > 0, got {getattr(self, key)}")
        if self.estimator not in {kind.value for kind in EstimatorKind}:
            raise ConfigError("estimator", f"must be one of {[kind.value for kind in EstimatorKind]}, got {self.estimator!r}")
        if len(self.target_tint) != 3 or any(not 0.0 < t <= 2.0 for t in self.target_tint):
            raise ConfigError("target_tint", f"must be three gains in (0, 2], got {list(self.target_tint)}")
        if not self.seeds:
            raise ConfigError("seeds", "at least one seed is required")
        if not self.methods:
            raise ConfigError("methods", "at least one method is required")
        if self.sp_count > self.width * self.height:
            raise ConfigError("sp_count", f"{self.sp_count} superpixels exceed the {self.width * self.height} pixels of a scene")
        for key in ("mix_fractions", "gamma_sweep"):
            if any(not 0.0 <= value <= 1.0 for value in getattr(self, key)):
                raise ConfigError(key, "values must lie in [0, 1]")

    def with_overrides(self, overrides: Mapping[str, Any]) -> ExperimentConfig:
        return replace(self, **coerce_values(overrides))

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        return {key: list(value) if isinstance(value, tuple) else value for key, value in data.items()}


_KINDS: dict[str, str] = {f.name: str(f.type) for f in fields(ExperimentConfig)}


def _coerce(key: str, kind: str, value: Any) -> Any:
    def fail(expected: str) -> ConfigError:
        return ConfigError(key, f"expected {expected}, got {value!r}")

    match kind:
        case "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise fail("an integer")
            return value
        case "float":
            if isinstance(value, bool) or not isinstance(value, int | float):
                raise fail("a number")
            if not math.isfinite(value):
                raise fail("a finite number")
            return float(value)
        case "bool":
            if not isinstance(value, bool):
                raise fail("true or false")
            return value
        case "bool | None":
            if value is not None and not isinstance(value, bool):
                raise fail("true, false or null")
            return value
        case "str":
            if not isinstance(value, str):
                raise fail("a string")
            return value
        case _ if kind.startswith("tuple["):
            item_kind = kind.removeprefix("tuple[").removesuffix(", ...]")
            items: list[Any]
            if isinstance(value, str):
                parts = _split_methods(value) if item_kind == "str" else value.split(",")
                items = [part.strip() if item_kind == "str" else yaml.safe_load(part) for part in parts]
            elif isinstance(value, list | tuple):
                items = list(cast(list[Any], value))
            elif item_kind != "str" and isinstance(value, int | float) and not isinstance(value, bool):
                items = [value]
            else:
                raise fail("a list")
            return tuple(_coerce(key, item_kind, item) for item in items)
        case _:
            raise ConfigError(key, f"unsupported field type {kind}")


def _split_methods(text: str) -> list[str]:
    """Split on commas outside parentheses, so "Ours(CC+I),NoAdapt" gives two names."""
    parts: list[str] = []
    depth = 0
    current = ""
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        if char == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += char
    if current.strip():
        parts.append(current)
    return parts


def coerce_values(values: Mapping[str, Any]) -> dict[str, Any]:
    """Type-check raw values against the config fields; unknown keys are rejected."""
    result: dict[str, Any] = {}
    for key, value in values.items():
        if key not in _KINDS:
            raise ConfigError(key, "unknown configuration key")
        result[key] = _coerce(key, _KINDS[key], value)
    return result


def parse_assignments(assignments: list[str]) -> dict[str, Any]:
    """``key=value`` strings from ``--set``; values are read as YAML scalars or lists."""
    result: dict[str, Any] = {}
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(assignment, "expected key=value")
        key, raw = assignment.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        result[key] = raw if _KINDS.get(key) in {"str", "tuple[str, ...]"} else yaml.safe_load(raw)
    return result


_ASSIGNMENT_LINE = re.compile(r"^\s*[A-Za-z_]\w*\s*=")


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines: list[tuple[int, str]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((number, stripped))
    return lines


def parse_key_value_text(text: str, source: str = "<text>") -> dict[str, Any]:
    """
    Read ``key = value`` lines.

    Blank lines and lines starting with ``#`` are skipped, as is a trailing
    `` # comment`` on a value line. Each line is split on its first ``=``;
    values are read the same way as ``--set`` assignments.

    Raises:
        ConfigError: naming ``source`` and the line number of a line without ``=``.
    """
    assignments: list[str] = []
    for number, line in _content_lines(text):
        if "=" not in line:
            raise ConfigError(f"{source}:{number}", "expected key = value")
        assignments.append(line.split(" #", 1)[0])
    return parse_assignments(assignments)


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a ``key = value`` file; a YAML mapping of ``key: value`` lines is accepted as well."""
    if not path.exists():
        msg = f"Config file not found: {path}"
        raise FileNotFoundError(msg)
    text = path.read_text(encoding="utf-8")
    lines = _content_lines(text)
    if lines and _ASSIGNMENT_LINE.match(lines[0][1]):
        return parse_key_value_text(text, str(path))
    data = yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(str(path), "config file must be a mapping of key: value lines")
    mapping = cast(dict[Any, Any], data)
    for key, value in mapping.items():
        if isinstance(value, dict):
            raise ConfigError(str(key), "nested mappings are not supported")
    return {str(key): value for key, value in mapping.items()}


def parse_config(
    path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    flags: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """
    Build the effective configuration.

    Precedence, lowest first: defaults, the config file, ``overrides`` (from
    ``--set``), ``flags`` (dedicated command-line options; None values are
    ignored).

    Raises:
        ConfigError: naming the key on unknown keys, wrong types or range violations.
        FileNotFoundError: if ``path`` does not exist.
    """
    merged: dict[str, Any] = {}
    if path is not None:
        merged.update(read_config_file(path))
    merged.update(overrides or {})
    merged.update({key: value for key, value in (flags or {}).items() if value is not None})
    return ExperimentConfig().with_overrides(merged)


def save_effective_config(config: ExperimentConfig, directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / EFFECTIVE_CONFIG_NAME
    target.write_text(yaml.safe_dump(config.to_dict(), sort_keys=False), encoding="utf-8")
    logger.debug("Effective config written to %s", target)
    return target
