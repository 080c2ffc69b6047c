"""Small per-pixel segmentation network with exact gradients and AdaDelta."""

from curda.segmodel.checkpoint import load_checkpoint, save_checkpoint
from curda.segmodel.gradcheck import GradCheckReport, check_gradient, check_model_gradient, relative_error
from curda.segmodel.network import (
    DEFAULT_FEATURES,
    ModelParams,
    forward,
    forward_cached,
    init_model,
    parameter_count,
    pixel_ce_loss,
    predict_mask,
    predict_masks,
    zero_model,
)
from curda.segmodel.objective import IMAGE_TAG, SOURCE_TAG, SUPERPIXEL_TAG, DistTerm, ObjectiveResult, Sample, backward, loss_and_grad
from curda.segmodel.optimizer import AdaDeltaState, adadelta_step

__all__ = [
    "DEFAULT_FEATURES",
    "IMAGE_TAG",
    "SOURCE_TAG",
    "SUPERPIXEL_TAG",
    "AdaDeltaState",
    "DistTerm",
    "GradCheckReport",
    "ModelParams",
    "ObjectiveResult",
    "Sample",
    "adadelta_step",
    "backward",
    "check_gradient",
    "check_model_gradient",
    "forward",
    "forward_cached",
    "init_model",
    "load_checkpoint",
    "loss_and_grad",
    "parameter_count",
    "pixel_ce_loss",
    "predict_mask",
    "predict_masks",
    "relative_error",
    "save_checkpoint",
    "zero_model",
]
