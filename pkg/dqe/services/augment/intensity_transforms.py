#!/usr/bin/env python3

"""
Intensity Transforms - Noise, contrast, brightness, gamma and resolution changes
These touch the MR channels only; label channels pass through bit-identical.
"""

from monai.transforms import (
    AdjustContrast, RandGaussianNoise, RandRicianNoise, Resize, ScaleIntensityFixedMean, ShiftIntensity
)

from .base_transform import BaseTransform, Params, TransformKind


class GaussianNoiseTransform(BaseTransform):
    name = 'gaussian_noise'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'std': self.uniform(rng, self.config.noise_std)}

    def validate(self, params: Params):
        self.require(params, ('std',))
        self.check(float(params['std']) >= 0, f"std must be non-negative, got {params['std']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['std']) == 0.0

    def _transform(self, stack, params, rng):
        noise = self.seeded(RandGaussianNoise(prob=1.0, mean=0.0, std=float(params['std']), sample_std=False), rng)
        return self.map_mr(stack, noise)


class ContrastTransform(BaseTransform):
    """Stretch around the channel mean, clipped to the channel's original range"""
    name = 'contrast'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'factor': self.uniform(rng, self.config.contrast)}

    def validate(self, params: Params):
        self.require(params, ('factor',))
        self.check(float(params['factor']) > 0, f"factor must be positive, got {params['factor']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['factor']) == 1.0

    def _transform(self, stack, params, rng):
        stretch = ScaleIntensityFixedMean(
            factor=float(params['factor']) - 1.0, preserve_range=True, fixed_mean=True, channel_wise=True
        )
        return self.map_mr(stack, stretch)


class BrightnessTransform(BaseTransform):
    name = 'brightness'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'shift': self.uniform(rng, self.config.brightness)}

    def validate(self, params: Params):
        self.require(params, ('shift',))

    def is_neutral(self, params: Params) -> bool:
        return float(params['shift']) == 0.0

    def _transform(self, stack, params, rng):
        return self.map_mr(stack, ShiftIntensity(offset=float(params['shift'])))


class GammaTransform(BaseTransform):
    """Power law applied within each channel's own [min, max] range"""
    name = 'gamma'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'gamma': self.uniform(rng, self.config.gamma)}

    def validate(self, params: Params):
        self.require(params, ('gamma',))
        self.check(float(params['gamma']) > 0, f"gamma must be positive, got {params['gamma']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['gamma']) == 1.0

    def _transform(self, stack, params, rng):
        return self.map_mr_channels(stack, AdjustContrast(gamma=float(params['gamma'])))


class LowResolutionTransform(BaseTransform):
    """Nearest-neighbour downsampling by `factor`, then back up to the original shape"""
    name = 'low_resolution'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'factor': self.uniform(rng, self.config.low_resolution)}

    def validate(self, params: Params):
        self.require(params, ('factor',))
        self.check(float(params['factor']) >= 1.0, f"factor must be >= 1, got {params['factor']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['factor']) == 1.0

    def _transform(self, stack, params, rng):
        factor = float(params['factor'])
        shape = stack.spatial_shape
        small = tuple(max(1, int(round(n / factor))) for n in shape)
        down = Resize(spatial_size=small, mode='nearest')
        up = Resize(spatial_size=tuple(shape), mode='nearest')
        return self.map_mr(stack, lambda mr: up(down(mr)))


class RicianNoiseTransform(BaseTransform):
    """Magnitude of the signal plus complex Gaussian noise"""
    name = 'rician_noise'
    kind = TransformKind.INTENSITY

    def sample_params(self, rng):
        return {'std': self.uniform(rng, self.config.rician_std)}

    def validate(self, params: Params):
        self.require(params, ('std',))
        self.check(float(params['std']) >= 0, f"std must be non-negative, got {params['std']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['std']) == 0.0

    def _transform(self, stack, params, rng):
        rician = self.seeded(RandRicianNoise(
            prob=1.0, mean=0.0, std=float(params['std']), relative=False, sample_std=False
        ), rng)
        return self.map_mr(stack, rician)
