"""Portable counter-based random numbers (SplitMix64).

Every random draw in curda comes from this generator so that datasets, model
initializations and batch schedules are reproducible across platforms and
languages. The n-th output for a seed ``s`` is ``mix64(s + (n + 1) * GOLDEN)``,
so any output can be computed independently of the others.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def mix64(values: NDArray[np.uint64]) -> NDArray[np.uint64]:
    """SplitMix64 finalizer applied elementwise."""
    with np.errstate(over="ignore"):
        z = values.copy()
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *keys: int | str) -> int:
    """Hash a seed with integer or string keys into a new 64-bit seed."""
    state = seed & _MASK64
    for key in keys:
        if isinstance(key, str):
            key_value = 0
            for byte in key.encode("utf-8"):
                key_value = ((key_value * 131) + byte) & _MASK64
        else:
            key_value = key & _MASK64
        mixed = mix64(np.array([(key_value + GOLDEN) & _MASK64], dtype=np.uint64))[0]
        state = int(mix64(np.array([state ^ int(mixed)], dtype=np.uint64))[0])
    return state


class SplitMix64:
    """Stateful view over the counter-based stream of one seed."""

    def __init__(self, seed: int, counter: int = 0) -> None:
        self.seed = seed & _MASK64
        self.counter = counter

    @property
    def state(self) -> tuple[int, int]:
        """(seed, counter) pair that fully determines future draws."""
        return self.seed, self.counter

    @classmethod
    def from_state(cls, state: tuple[int, int]) -> SplitMix64:
        return cls(state[0], state[1])

    def next_u64(self, n: int) -> NDArray[np.uint64]:
        """The next ``n`` raw 64-bit outputs."""
        with np.errstate(over="ignore"):
            steps = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
            values = np.uint64(self.seed) + steps * np.uint64(GOLDEN)
        self.counter += n
        return mix64(values)

    def uniform(self, n: int) -> NDArray[np.float64]:
        """``n`` doubles in [0, 1) built from the top 53 bits."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def uniform_scalar(self, low: float = 0.0, high: float = 1.0) -> float:
        return low + (high - low) * float(self.uniform(1)[0])

    def normal(self, n: int) -> NDArray[np.float64]:
        """``n`` standard normal draws (Box-Muller, two uniforms per draw)."""
        u = self.uniform(2 * n).reshape(n, 2)
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        return radius * np.cos(2.0 * math.pi * u[:, 1])

    def normal_scalar(self, mean: float = 0.0, std: float = 1.0) -> float:
        return mean + std * float(self.normal(1)[0])

    def integers(self, low: int, high: int, n: int) -> NDArray[np.int64]:
        """``n`` integers in [low, high)."""
        if high <= low:
            msg = f"empty integer range [{low}, {high})"
            raise ValueError(msg)
        span = high - low
        return low + np.minimum(np.floor(self.uniform(n) * span).astype(np.int64), span - 1)

    def integer(self, low: int, high: int) -> int:
        return int(self.integers(low, high, 1)[0])

    def permutation(self, n: int) -> NDArray[np.int64]:
        """Uniform random permutation of ``range(n)`` (stable argsort of uniform keys)."""
        return np.argsort(self.uniform(n), kind="stable").astype(np.int64)

    def sample_without_replacement(self, n: int, k: int) -> NDArray[np.int64]:
        """``k`` distinct indices from ``range(n)`` (partial Fisher-Yates)."""
        if k > n:
            msg = f"cannot draw {k} distinct items from {n}"
            raise ValueError(msg)
        items = np.arange(n, dtype=np.int64)
        u = self.uniform(k)
        for i in range(k):
            j = i + min(int(u[i] * (n - i)), n - i - 1)
            items[i], items[j] = items[j], items[i]
        return items[:k].copy()
