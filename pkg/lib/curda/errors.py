"""Exception types shared across curda."""

from __future__ import annotations

from collections.abc import Mapping


class ConfigError(ValueError):
    """Invalid configuration value. Always names the offending key."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}")


class TensorFormatError(ValueError):
    """Malformed tensor or bundle file. Always names the byte offset."""

    def __init__(self, offset: int, message: str) -> None:
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class DivergenceError(RuntimeError):
    """A numeric stage produced non-finite values."""

    def __init__(
        self,
        stage: str,
        *,
        step: int | None = None,
        components: Mapping[str, float] | None = None,
    ) -> None:
        self.stage = stage
        self.step = step
        self.components = dict(components or {})
        parts = [f"non-finite values in {stage}"]
        if step is not None:
            parts.append(f"step {step}")
        if self.components:
            parts.append(", ".join(f"{name}={value:.6g}" for name, value in self.components.items()))
        super().__init__("; ".join(parts))
