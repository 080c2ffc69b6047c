"""Model checkpoints in the tagged bundle format.

Sections: ``DIMS`` (int32 [F, C]), ``PARM`` (float64 flat parameters) and,
when an optimizer state is saved, ``ADEG`` / ``ADEX`` (running averages) and
``ADHP`` (float64 [rho, eps]).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from curda.errors import TensorFormatError
from curda.io import load_bundle, save_bundle
from curda.segmodel.network import ModelParams
from curda.segmodel.optimizer import AdaDeltaState


def save_checkpoint(path: Path, params: ModelParams, state: AdaDeltaState | None = None) -> Path:
    sections: dict[str, NDArray[np.generic]] = {
        "DIMS": np.array([params.features, params.classes], dtype=np.int32),
        "PARM": params.vector,
    }
    if state is not None:
        sections["ADEG"] = state.eg2
        sections["ADEX"] = state.edx2
        sections["ADHP"] = np.array([state.rho, state.eps])
    return save_bundle(path, sections)


def load_checkpoint(path: Path) -> tuple[ModelParams, AdaDeltaState | None]:
    sections = load_bundle(path)
    if "DIMS" not in sections or "PARM" not in sections:
        raise TensorFormatError(0, f"checkpoint {path} lacks DIMS/PARM sections")
    features, classes = (int(v) for v in sections["DIMS"])
    params = ModelParams(features, classes, np.asarray(sections["PARM"], dtype=np.float64))
    state = None
    if "ADEG" in sections:
        rho, eps = (float(v) for v in sections["ADHP"])
        state = AdaDeltaState(
            eg2=np.asarray(sections["ADEG"], dtype=np.float64),
            edx2=np.asarray(sections["ADEX"], dtype=np.float64),
            rho=rho,
            eps=eps,
        )
    return params, state
