"""The curriculum objective over one mixed source/target mini-batch.

    gamma / |S| * sum_s pixel_ce(s)
    + (1 - gamma) / |T| * sum_t [ C(p_t, p_hat_t) + 1 / |L_t| * sum_l C(p_l, p_hat_l) ]

The image term is included when ``use_image_term`` is set, the landmark term
when ``use_sp_term`` is set; images without landmarks only get the image term.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from curda.curriculum.properties import TargetProperties
from curda.curriculum.settings import TrainConfig
from curda.numerics import FloatArray, IntArray
from curda.segmodel import IMAGE_TAG, SUPERPIXEL_TAG, DistTerm, ModelParams, ObjectiveResult, Sample, loss_and_grad


@dataclass(frozen=True)
class Batch:
    source_images: Sequence[FloatArray] = field(default_factory=list[FloatArray])
    source_masks: Sequence[IntArray] = field(default_factory=list[IntArray])
    target_images: Sequence[FloatArray] = field(default_factory=list[FloatArray])
    # index of each target image in the properties
    target_indices: Sequence[int] = field(default_factory=list[int])


def build_samples(batch: Batch, props: TargetProperties | None, config: TrainConfig) -> list[Sample]:
    """Weighted objective samples for a batch; zero-weight samples are dropped."""
    samples: list[Sample] = []
    num_source = len(batch.source_images)
    if num_source and config.gamma > 0.0:
        weight = config.gamma / num_source
        samples.extend(Sample(image=image, mask=mask, ce_weight=weight) for image, mask in zip(batch.source_images, batch.source_masks, strict=True))
    num_target = len(batch.target_images)
    if num_target == 0 or config.gamma >= 1.0 or not config.uses_target_terms:
        return samples
    if props is None:
        msg = "target images in a batch need target properties"
        raise ValueError(msg)
    weight = (1.0 - config.gamma) / num_target
    for image, index in zip(batch.target_images, batch.target_indices, strict=True):
        terms: list[DistTerm] = []
        if config.use_image_term:
            terms.append(DistTerm(target=props.image_dists[index], weight=weight, tag=IMAGE_TAG))
        regions = props.landmarks[index]
        if config.use_sp_term and regions:
            share = weight / len(regions)
            terms.extend(DistTerm(target=item.dist, weight=share, region=item.region, tag=SUPERPIXEL_TAG) for item in regions)
        if terms:
            samples.append(Sample(image=image, terms=tuple(terms)))
    return samples


def total_loss(params: ModelParams, batch: Batch, props: TargetProperties | None, config: TrainConfig, *, with_grad: bool = False) -> ObjectiveResult:
    """Evaluate the objective; ``components`` holds the source, image and superpixel parts."""
    return loss_and_grad(params, build_samples(batch, props, config), config.k, with_grad=with_grad)
