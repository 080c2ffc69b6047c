"""AdaDelta with running averages of squared gradients and squared updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from curda.numerics import FloatArray

DEFAULT_RHO = 0.95
DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class AdaDeltaState:
    eg2: FloatArray
    edx2: FloatArray
    rho: float = DEFAULT_RHO
    eps: float = DEFAULT_EPS

    @classmethod
    def fresh(cls, size: int, rho: float = DEFAULT_RHO, eps: float = DEFAULT_EPS) -> AdaDeltaState:
        return cls(eg2=np.zeros(size), edx2=np.zeros(size), rho=rho, eps=eps)


def adadelta_step(state: AdaDeltaState, params: FloatArray, grads: FloatArray) -> tuple[FloatArray, AdaDeltaState]:
    """
    One AdaDelta update, elementwise:

        eg2   <- rho * eg2 + (1 - rho) * g^2
        delta  = -sqrt(edx2 + eps) / sqrt(eg2 + eps) * g
        edx2  <- rho * edx2 + (1 - rho) * delta^2
        params <- params + delta

    Inputs are not modified.
    """
    if not (state.eg2.shape == state.edx2.shape == params.shape == grads.shape):
        msg = f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.eg2.shape}/{state.edx2.shape}"
        raise ValueError(msg)
    rho, eps = state.rho, state.eps
    eg2 = rho * state.eg2 + (1.0 - rho) * grads * grads
    delta = -(np.sqrt(state.edx2 + eps) / np.sqrt(eg2 + eps)) * grads
    edx2 = rho * state.edx2 + (1.0 - rho) * delta * delta
    return params + delta, AdaDeltaState(eg2=eg2, edx2=edx2, rho=rho, eps=eps)
