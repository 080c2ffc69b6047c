"""Training hyper-parameters for the curriculum objective."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Any

from curda.errors import ConfigError
from curda.labeldist.distributions import DEFAULT_K
from curda.segmodel.network import DEFAULT_FEATURES

NO_ADAPT_SOURCE_BATCH = 15


@dataclass(frozen=True)
class TrainConfig:
    """
    gamma balances the source pixel loss (gamma) against the target
    distribution terms (1 - gamma). With ``tgt_batch`` 0 the run is plain
    source-only training.
    """

    gamma: float = 0.5
    k: float = DEFAULT_K
    src_batch: int = 5
    tgt_batch: int = 5
    steps: int = 2000
    seed: int = 0
    use_image_term: bool = True
    use_sp_term: bool = True
    use_cc: bool = False
    features: int = DEFAULT_FEATURES
    checkpoint_every: int = 0
    log_every: int = 100

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma", f"must lie in [0, 1], got {self.gamma}")
        if self.k < 1.0:
            raise ConfigError("k", f"must be >= 1, got {self.k}")
        if self.src_batch < 0 or self.tgt_batch < 0:
            raise ConfigError("src_batch" if self.src_batch < 0 else "tgt_batch", "batch sizes must be >= 0")
        if self.src_batch + self.tgt_batch == 0:
            raise ConfigError("src_batch", "at least one of src_batch and tgt_batch must be positive")
        if self.gamma > 0.0 and self.src_batch == 0:
            raise ConfigError("src_batch", "gamma > 0 needs source images in every batch")
        if self.gamma < 1.0 and self.tgt_batch == 0 and self.uses_target_terms:
            raise ConfigError("tgt_batch", "target terms are enabled but no target images are sampled")
        if self.steps < 0:
            raise ConfigError("steps", f"must be >= 0, got {self.steps}")
        if self.features < 1:
            raise ConfigError("features", f"must be >= 1, got {self.features}")
        if self.checkpoint_every < 0 or self.log_every < 0:
            raise ConfigError("checkpoint_every" if self.checkpoint_every < 0 else "log_every", "must be >= 0")

    @property
    def uses_target_terms(self) -> bool:
        return self.use_image_term or self.use_sp_term

    @classmethod
    def no_adapt(cls, **overrides: Any) -> TrainConfig:
        """Source-only training with the larger source batch."""
        base: dict[str, Any] = {
            "gamma": 1.0,
            "src_batch": NO_ADAPT_SOURCE_BATCH,
            "tgt_batch": 0,
            "use_image_term": False,
            "use_sp_term": False,
        }
        base.update(overrides)
        return cls(**base)

    def with_changes(self, **changes: Any) -> TrainConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
