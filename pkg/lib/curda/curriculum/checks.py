"""Finite-difference check of the full curriculum objective on a tiny batch."""

from __future__ import annotations

from curda.curriculum.loss import Batch, build_samples
from curda.curriculum.properties import LandmarkRegion, TargetProperties
from curda.curriculum.settings import TrainConfig
from curda.curriculum.trainer import initial_model
from curda.labeldist import gt_label_distribution, one_hot_distribution
from curda.rng import SplitMix64, derive_seed
from curda.scenegen import DomainKind, default_domain_params, generate_scene
from curda.scenegen.painter import MIN_SIZE
from curda.scenegen.params import NUM_CLASSES
from curda.segmodel import GradCheckReport, check_model_gradient
from curda.superpix import dominant_labels, slic_segment

CHECK_SUPERPIXELS = 4


def composite_check(
    seed: int = 0,
    *,
    size: int = 8,
    features: int = 4,
    k: float = 6.0,
    coords: int = 100,
    gamma: float = 0.5,
) -> GradCheckReport:
    """
    Check the gradient of the source, image and landmark terms together on one
    source and one target scene cropped to ``size`` x ``size``. The target's
    true label distribution serves as its image-level estimate and every
    superpixel of a coarse oversegmentation becomes a one-hot landmark.
    """
    if not 2 <= size <= MIN_SIZE:
        msg = f"check size must lie in [2, {MIN_SIZE}], got {size}"
        raise ValueError(msg)
    source = generate_scene(derive_seed(seed, "check-source"), 0, default_domain_params(DomainKind.SOURCE_LIKE), MIN_SIZE, MIN_SIZE)
    target = generate_scene(derive_seed(seed, "check-target"), 0, default_domain_params(DomainKind.TARGET_LIKE), MIN_SIZE, MIN_SIZE)
    source_image, source_mask = source.image[:size, :size].copy(), source.mask[:size, :size].copy()
    target_image, target_mask = target.image[:size, :size].copy(), target.mask[:size, :size].copy()

    spmap = slic_segment(target_image, min(CHECK_SUPERPIXELS, size * size))
    labels = dominant_labels(spmap, target_mask, NUM_CLASSES)
    regions = tuple(LandmarkRegion(sp, spmap.region(sp), one_hot_distribution(int(labels[sp]), NUM_CLASSES)) for sp in range(spmap.count))
    props = TargetProperties(image_dists=gt_label_distribution(target_mask, NUM_CLASSES)[None, :], landmarks=(regions,))

    config = TrainConfig(gamma=gamma, k=k, src_batch=1, tgt_batch=1, seed=seed, features=features)
    params = initial_model(config, NUM_CLASSES)
    jitter = 0.05 * SplitMix64(derive_seed(seed, "check-jitter")).normal(params.vector.size)
    params = params.with_vector(params.vector + jitter)
    batch = Batch(source_images=[source_image], source_masks=[source_mask], target_images=[target_image], target_indices=[0])
    return check_model_gradient(params, build_samples(batch, props, config), k, coords=coords, seed=seed)
