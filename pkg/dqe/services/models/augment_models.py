#!/usr/bin/env python3

"""
Augment Models - Probabilities and magnitude ranges of the augmentation pipeline
"""

from dataclasses import dataclass, field, fields
from typing import Any, Dict, Tuple

from ..exceptions import InvalidConfigError


Range = Tuple[float, float]

# Transform name -> probability field. Order is the pipeline order.
SPATIAL_TRANSFORMS = ('flip', 'affine', 'elastic')
INTENSITY_TRANSFORMS = ('gaussian_noise', 'contrast', 'brightness', 'gamma', 'low_resolution', 'rician_noise')
ARTIFACT_TRANSFORMS = ('motion', 'ghosting', 'spikes', 'bias_field')
ALL_TRANSFORMS = SPATIAL_TRANSFORMS + INTENSITY_TRANSFORMS + ARTIFACT_TRANSFORMS


@dataclass
class AugmentConfig:
    """
    Training-time augmentation settings.

    Each transform has a probability `p_<name>` and one or more (low, high)
    ranges its magnitude is drawn from. Neutral magnitudes (scale 1, shift 0,
    sigma 0, ...) make a transform an exact no-op.
    """
    seed: int = 0

    p_flip: float = 0.5

    p_affine: float = 0.5
    rotation_degrees: Range = (-15.0, 15.0)
    scale: Range = (0.9, 1.1)
    translation_fraction: Range = (-0.1, 0.1)

    p_elastic: float = 0.5
    elastic_grid_spacing: Range = (8.0, 16.0)
    elastic_sigma: Range = (0.0, 2.0)

    p_gaussian_noise: float = 0.5
    noise_std: Range = (0.0, 0.05)

    p_contrast: float = 0.5
    contrast: Range = (0.75, 1.25)

    p_brightness: float = 0.5
    brightness: Range = (-0.1, 0.1)

    p_gamma: float = 0.5
    gamma: Range = (0.7, 1.5)

    p_low_resolution: float = 0.5
    low_resolution: Range = (1.0, 2.0)

    p_rician_noise: float = 0.5
    rician_std: Range = (0.0, 0.05)

    p_motion: float = 0.5
    motion_displacement: Range = (-3.0, 3.0)
    motion_weight: Range = (0.0, 0.4)

    p_ghosting: float = 0.5
    ghosting_count: Range = (2.0, 6.0)
    ghosting_intensity: Range = (0.0, 0.5)

    p_spikes: float = 0.5
    spike_intensity: Range = (0.0, 0.1)

    p_bias_field: float = 0.5
    bias_magnitude: Range = (0.0, 0.3)
    bias_order: int = 3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name.startswith('p_'):
                if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
                    raise InvalidConfigError(f"augment.{f.name} must lie in [0, 1], got {value}")
                setattr(self, f.name, float(value))
            elif isinstance(value, (tuple, list)):
                if len(value) != 2:
                    raise InvalidConfigError(f"augment.{f.name} must be a (low, high) pair, got {value}")
                low, high = float(value[0]), float(value[1])
                if low > high:
                    raise InvalidConfigError(f"augment.{f.name} has low {low} > high {high}")
                setattr(self, f.name, (low, high))
        self._check_domains()

    def _check_domains(self):
        """Ranges whose values are only meaningful on part of the real line"""
        positive = ('scale', 'contrast', 'gamma')
        nonnegative = ('noise_std', 'rician_std', 'elastic_sigma', 'ghosting_intensity', 'spike_intensity',
                       'bias_magnitude')
        for name in positive:
            if getattr(self, name)[0] <= 0:
                raise InvalidConfigError(f"augment.{name} must be positive, got {getattr(self, name)}")
        for name in nonnegative:
            if getattr(self, name)[0] < 0:
                raise InvalidConfigError(f"augment.{name} must be non-negative, got {getattr(self, name)}")
        if self.low_resolution[0] < 1.0:
            raise InvalidConfigError(f"augment.low_resolution factors must be >= 1, got {self.low_resolution}")
        if self.elastic_grid_spacing[0] < 2.0:
            raise InvalidConfigError(f"augment.elastic_grid_spacing must be >= 2 pixels, got {self.elastic_grid_spacing}")
        if self.ghosting_count[0] < 1.0:
            raise InvalidConfigError(f"augment.ghosting_count must be >= 1, got {self.ghosting_count}")
        if self.ghosting_intensity[1] > 1.0:
            raise InvalidConfigError(f"augment.ghosting_intensity must not exceed 1, got {self.ghosting_intensity}")
        if self.motion_weight[0] < 0.0 or self.motion_weight[1] > 1.0:
            raise InvalidConfigError(f"augment.motion_weight must lie in [0, 1], got {self.motion_weight}")
        if not isinstance(self.bias_order, int) or self.bias_order < 1:
            raise InvalidConfigError(f"augment.bias_order must be a positive integer, got {self.bias_order}")
        if not isinstance(self.seed, int):
            raise InvalidConfigError(f"augment.seed must be an integer, got {self.seed!r}")

    def probability(self, transform: str) -> float:
        return getattr(self, f"p_{transform}")

    @classmethod
    def disabled(cls, seed: int = 0) -> 'AugmentConfig':
        """Every probability zero: the pipeline is the identity"""
        return cls(seed=seed, **{f"p_{name}": 0.0 for name in ALL_TRANSFORMS})

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AugmentConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown augment keys: {', '.join(unknown)}")
        values = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        result = {}
        for f in fields(self):
            value = getattr(self, f.name)
            result[f.name] = list(value) if isinstance(value, tuple) else value
        return result
