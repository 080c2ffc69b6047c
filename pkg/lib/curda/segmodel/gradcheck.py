"""Central finite-difference checks of analytic gradients."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from curda.numerics import FloatArray
from curda.rng import SplitMix64
from curda.segmodel.network import ModelParams, forward_cached
from curda.segmodel.objective import Sample, loss_and_grad

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
DEFAULT_COORDS = 100
# Below this gradient magnitude the check is absolute rather than relative.
ERROR_FLOOR = 1e-2


@dataclass
class GradCheckReport:
    coords: list[int] = field(default_factory=list[int])
    analytic: list[float] = field(default_factory=list[float])
    numeric: list[float] = field(default_factory=list[float])
    skipped: list[int] = field(default_factory=list[int])

    @property
    def errors(self) -> list[float]:
        return [relative_error(a, n) for a, n in zip(self.analytic, self.numeric, strict=True)]

    @property
    def max_error(self) -> float:
        return max(self.errors, default=0.0)

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_error < tolerance


def relative_error(analytic: float, numeric: float, floor: float = ERROR_FLOOR) -> float:
    """
    |a - n| / max(|a|, |n|, floor).

    This is a mixed criterion. Where either gradient is at least ``floor`` in
    magnitude it is the plain relative error. Below that it is the absolute
    error divided by ``floor``, so a 1e-4 tolerance means an absolute error of
    at most 1e-6 there.
    """
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradient(
    loss_fn: Callable[[FloatArray], float],
    grad: FloatArray,
    point: FloatArray,
    *,
    coords: int = DEFAULT_COORDS,
    step: float = DEFAULT_STEP,
    seed: int = 0,
    signature: Callable[[FloatArray], bytes] | None = None,
) -> GradCheckReport:
    """
    Compare ``grad`` with central differences of ``loss_fn`` at ``point``.

    Coordinates are visited in a seeded random order until ``coords`` of them
    have been checked. When ``signature`` is given, a coordinate whose +step
    and -step evaluations have different signatures (a kink was crossed) is
    skipped and recorded instead.
    """
    order = SplitMix64(seed).permutation(point.size)
    report = GradCheckReport()
    for index in order:
        if len(report.coords) >= coords:
            break
        plus = point.copy()
        plus[index] += step
        minus = point.copy()
        minus[index] -= step
        if signature is not None and signature(plus) != signature(minus):
            report.skipped.append(int(index))
            continue
        numeric = (loss_fn(plus) - loss_fn(minus)) / (2.0 * step)
        report.coords.append(int(index))
        report.analytic.append(float(grad[index]))
        report.numeric.append(float(numeric))
    if report.skipped:
        logger.debug("Skipped %d coordinates that crossed a kink", len(report.skipped))
    return report


def activation_signature(params: ModelParams, samples: Sequence[Sample]) -> bytes:
    """ReLU on/off pattern and per-pixel arg-max of every active sample."""
    parts: list[bytes] = []
    for sample in samples:
        if not sample.is_active:
            continue
        cache = forward_cached(params, sample.image)
        parts.append(np.packbits(cache.z1 > 0).tobytes())
        parts.append(np.packbits(cache.z2 > 0).tobytes())
        parts.append(cache.logits.argmax(axis=1).astype(np.int8).tobytes())
    return b"".join(parts)


def check_model_gradient(
    params: ModelParams,
    samples: Sequence[Sample],
    k: float,
    *,
    coords: int = DEFAULT_COORDS,
    step: float = DEFAULT_STEP,
    seed: int = 0,
) -> GradCheckReport:
    """Finite-difference check of the composite objective's gradient."""
    result = loss_and_grad(params, samples, k)
    assert result.grad is not None

    def loss_at(vector: FloatArray) -> float:
        return loss_and_grad(params.with_vector(vector), samples, k, with_grad=False).loss

    def signature_at(vector: FloatArray) -> bytes:
        return activation_signature(params.with_vector(vector), samples)

    return check_gradient(loss_at, result.grad, params.vector, coords=coords, step=step, seed=seed, signature=signature_at)
