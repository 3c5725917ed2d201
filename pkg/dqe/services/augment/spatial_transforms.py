#!/usr/bin/env python3

"""
Spatial Transforms - Flip, affine and elastic deformation of slice stacks

MR and label channels move together; MR channels are resampled bilinearly,
label channels with nearest neighbour so their values stay discrete.
Pixels mapped from outside the slice are filled with 0.
"""

import math

import numpy as np
from monai.transforms import Affine, Flip, Rand2DElastic

from .base_transform import BaseTransform, Params, TransformKind, pair, to_numpy
from ..models.volume_models import SliceStack


MR_MODE = 'bilinear'
LABEL_MODE = 'nearest'
PADDING = 'zeros'


def _resample(stack: SliceStack, sample) -> np.ndarray:
    """Run `sample(block, mode)` on the MR block and the label block with their own interpolation"""
    n_mr = stack.mr.shape[0]
    channels = stack.channels.astype(np.float32)
    return np.concatenate([
        to_numpy(sample(channels[:n_mr], MR_MODE)),
        to_numpy(sample(channels[n_mr:], LABEL_MODE)),
    ])


class FlipTransform(BaseTransform):
    name = 'flip'
    kind = TransformKind.SPATIAL

    def sample_params(self, rng):
        choice = int(rng.integers(0, 3))
        return {'horizontal': choice in (0, 2), 'vertical': choice in (1, 2)}

    def validate(self, params: Params):
        self.require(params, ('horizontal', 'vertical'))

    def is_neutral(self, params: Params) -> bool:
        return not params['horizontal'] and not params['vertical']

    def _transform(self, stack, params, rng):
        axes = [axis for axis, key in enumerate(('vertical', 'horizontal')) if params[key]]
        return to_numpy(Flip(spatial_axis=axes)(stack.channels))


class AffineTransform(BaseTransform):
    """
    Rotation and isotropic scaling about the slice center, then translation.
    Translation is a fraction of the slice extent along (rows, columns).
    """
    name = 'affine'
    kind = TransformKind.SPATIAL

    def sample_params(self, rng):
        cfg = self.config
        return {
            'rotation': self.uniform(rng, cfg.rotation_degrees),
            'scale': self.uniform(rng, cfg.scale),
            'translation': (self.uniform(rng, cfg.translation_fraction),
                            self.uniform(rng, cfg.translation_fraction)),
        }

    def validate(self, params: Params):
        self.require(params, ('rotation', 'scale', 'translation'))
        self.check(float(params['scale']) > 0, f"scale must be positive, got {params['scale']}")
        pair(params['translation'], 'affine translation')

    def is_neutral(self, params: Params) -> bool:
        ty, tx = pair(params['translation'], 'affine translation')
        return float(params['rotation']) == 0.0 and float(params['scale']) == 1.0 and ty == 0.0 and tx == 0.0

    def _transform(self, stack, params, rng):
        height, width = stack.spatial_shape
        scale = float(params['scale'])
        ty, tx = pair(params['translation'], 'affine translation')
        affine = Affine(
            rotate_params=math.radians(float(params['rotation'])),
            scale_params=(scale, scale),
            translate_params=(ty * height, tx * width),
            padding_mode=PADDING,
            image_only=True,
        )
        return _resample(stack, lambda block, mode: affine(block, mode=mode))


class ElasticTransform(BaseTransform):
    """
    Smooth random displacement: offsets on a control grid `grid_spacing`
    pixels apart with magnitude `sigma` pixels, interpolated to every pixel.
    """
    name = 'elastic'
    kind = TransformKind.SPATIAL

    def sample_params(self, rng):
        cfg = self.config
        return {
            'grid_spacing': self.uniform(rng, cfg.elastic_grid_spacing),
            'sigma': self.uniform(rng, cfg.elastic_sigma),
        }

    def validate(self, params: Params):
        self.require(params, ('grid_spacing', 'sigma'))
        self.check(float(params['grid_spacing']) >= 2.0,
                   f"grid_spacing must be at least 2 pixels, got {params['grid_spacing']}")
        self.check(float(params['sigma']) >= 0.0, f"sigma must be non-negative, got {params['sigma']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['sigma']) == 0.0

    def _transform(self, stack, params, rng):
        spacing = float(params['grid_spacing'])
        sigma = float(params['sigma'])
        elastic = self.seeded(Rand2DElastic(
            spacing=(spacing, spacing), magnitude_range=(sigma, sigma), prob=1.0, padding_mode=PADDING
        ), rng)
        n_mr = stack.mr.shape[0]
        channels = stack.channels.astype(np.float32)
        mr = to_numpy(elastic(channels[:n_mr], mode=MR_MODE))
        # same field for the labels
        labels = to_numpy(elastic(channels[n_mr:], mode=LABEL_MODE, randomize=False))
        return np.concatenate([mr, labels])
