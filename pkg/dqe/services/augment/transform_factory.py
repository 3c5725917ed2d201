#!/usr/bin/env python3

"""
Transform Factory - Registry of augmentations and the augmentation pipeline
"""

from typing import Dict, List, Optional, Type, Union

import numpy as np

from .base_transform import BaseTransform, Params, TransformKind
from .artifact_transforms import BiasFieldTransform, GhostingTransform, MotionTransform, SpikeTransform
from .intensity_transforms import (
    BrightnessTransform, ContrastTransform, GammaTransform, GaussianNoiseTransform,
    LowResolutionTransform, RicianNoiseTransform
)
from .spatial_transforms import AffineTransform, ElasticTransform, FlipTransform
from ..exceptions import InvalidConfigError
from ..logger import Logger
from ..models.augment_models import ALL_TRANSFORMS, AugmentConfig
from ..models.volume_models import SliceStack

log = Logger('augment')


Draw = Union[np.random.Generator, int, None]


class TransformFactory:
    """
    Creates transforms by name.

    Uses a registry so additional augmentations can be plugged in
    without touching the pipeline.
    """

    def __init__(self):
        self._transforms: Dict[str, Type[BaseTransform]] = {}
        self._register_default_transforms()

    def register_transform(self, name: str, transform_cls: Type[BaseTransform]):
        self._transforms[name] = transform_cls

    def create_transform(self, name: str, config: AugmentConfig) -> BaseTransform:
        if name not in self._transforms:
            raise InvalidConfigError(f"No transform registered under '{name}'")
        return self._transforms[name](config)

    def get_supported_transforms(self, kind: Optional[TransformKind] = None) -> List[str]:
        return [name for name, cls in self._transforms.items() if kind is None or cls.kind is kind]

    def is_supported(self, name: str) -> bool:
        return name in self._transforms

    def _register_default_transforms(self):
        for transform_cls in (
            FlipTransform, AffineTransform, ElasticTransform,
            GaussianNoiseTransform, ContrastTransform, BrightnessTransform, GammaTransform,
            LowResolutionTransform, RicianNoiseTransform,
            MotionTransform, GhostingTransform, SpikeTransform, BiasFieldTransform,
        ):
            self.register_transform(transform_cls.name, transform_cls)


# Global factory instance
_transform_factory = None


def get_transform_factory() -> TransformFactory:
    """Get the global transform factory instance"""
    global _transform_factory
    if _transform_factory is None:
        _transform_factory = TransformFactory()
    return _transform_factory


def as_generator(draw: Draw, default_seed: int = 0) -> np.random.Generator:
    if isinstance(draw, np.random.Generator):
        return draw
    return np.random.default_rng(default_seed if draw is None else draw)


def apply_pipeline(stack: SliceStack, config: AugmentConfig, draw: Draw = None) -> SliceStack:
    """
    Run every augmentation in pipeline order, each with its own probability.

    Args:
        stack: input slice stack (not modified)
        config: probabilities and magnitude ranges
        draw: generator, integer seed, or None to use config.seed

    Returns:
        Augmented stack of the same shape
    """
    rng = as_generator(draw, config.seed)
    factory = get_transform_factory()
    result = stack.replace_channels(stack.channels.copy())
    for name in ALL_TRANSFORMS:
        result = factory.create_transform(name, config)(result, rng)
    return result


def _apply_kind(stack: SliceStack, kind_name: str, expected: TransformKind, params: Optional[Params],
                draw: Draw, config: Optional[AugmentConfig]) -> SliceStack:
    factory = get_transform_factory()
    if kind_name not in factory.get_supported_transforms(expected):
        allowed = ', '.join(factory.get_supported_transforms(expected))
        raise InvalidConfigError(f"'{kind_name}' is not a {expected.value} transform (expected one of: {allowed})")
    config = config or AugmentConfig()
    rng = as_generator(draw, config.seed)
    transform = factory.create_transform(kind_name, config)
    if params is None:
        params = transform.sample_params(rng)
    return transform.apply(stack, params, rng)


def transform_spatial(stack: SliceStack, kind: str, params: Optional[Params] = None,
                      draw: Draw = None, config: Optional[AugmentConfig] = None) -> SliceStack:
    """Flip, affine or elastic deformation of MR and label channels together"""
    return _apply_kind(stack, kind, TransformKind.SPATIAL, params, draw, config)


def transform_intensity(stack: SliceStack, kind: str, params: Optional[Params] = None,
                        draw: Draw = None, config: Optional[AugmentConfig] = None) -> SliceStack:
    """Noise, contrast, brightness, gamma, low resolution or Rician noise on MR channels"""
    return _apply_kind(stack, kind, TransformKind.INTENSITY, params, draw, config)


def transform_artifact(stack: SliceStack, kind: str, params: Optional[Params] = None,
                       draw: Draw = None, config: Optional[AugmentConfig] = None) -> SliceStack:
    """Motion, ghosting, spikes or bias field"""
    return _apply_kind(stack, kind, TransformKind.ARTIFACT, params, draw, config)
