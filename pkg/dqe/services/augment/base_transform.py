#!/usr/bin/env python3

"""
Base Transform - Abstract interface for slice-stack augmentations
Defines the contract every spatial, intensity and artifact transform implements
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Iterable, Tuple

import numpy as np
from monai.utils import convert_to_numpy

from ..exceptions import InvalidConfigError
from ..models.augment_models import AugmentConfig, Range
from ..models.volume_models import SliceStack


Params = Dict[str, Any]


class TransformKind(Enum):
    """Which channels a transform touches"""
    SPATIAL = "spatial"        # MR and label channels, labels with nearest neighbour
    INTENSITY = "intensity"    # MR channels only
    ARTIFACT = "artifact"      # MR channels only, except motion displacement


class BaseTransform(ABC):
    """
    One augmentation.

    `sample_params` draws magnitudes from the configured ranges, `apply`
    runs the transform with explicit parameters. Any randomness that is
    not a parameter (noise realizations, displacement fields, bias field
    coefficients) comes from the generator passed to `apply`, which seeds
    the underlying MONAI transform.
    """

    name: str = ''
    kind: TransformKind = TransformKind.INTENSITY

    def __init__(self, config: AugmentConfig):
        self.config = config

    @property
    def probability(self) -> float:
        return self.config.probability(self.name)

    @abstractmethod
    def sample_params(self, rng: np.random.Generator) -> Params:
        """Draw parameters from the configured ranges"""
        pass

    @abstractmethod
    def validate(self, params: Params):
        """Raise InvalidConfigError for missing or out-of-domain parameters"""
        pass

    @abstractmethod
    def is_neutral(self, params: Params) -> bool:
        """True when the parameters make this transform the identity"""
        pass

    @abstractmethod
    def _transform(self, stack: SliceStack, params: Params, rng: np.random.Generator) -> np.ndarray:
        """Return the transformed channel array"""
        pass

    def apply(self, stack: SliceStack, params: Params, rng: np.random.Generator) -> SliceStack:
        self.validate(params)
        if self.is_neutral(params):
            return stack.replace_channels(stack.channels.copy())
        channels = self._transform(stack, params, rng)
        return stack.replace_channels(np.asarray(channels, dtype=np.float32))

    def __call__(self, stack: SliceStack, rng: np.random.Generator) -> SliceStack:
        """Apply with the configured probability; the coin is always drawn"""
        if rng.random() >= self.probability:
            return stack
        return self.apply(stack, self.sample_params(rng), rng)

    # -- helpers shared by the concrete transforms

    @staticmethod
    def uniform(rng: np.random.Generator, bounds: Range) -> float:
        low, high = bounds
        return float(rng.uniform(low, high)) if high > low else float(low)

    def require(self, params: Params, keys: Iterable[str]):
        missing = [k for k in keys if k not in params]
        if missing:
            raise InvalidConfigError(f"{self.name} parameters lack {missing}")

    def check(self, condition: bool, message: str):
        if not condition:
            raise InvalidConfigError(f"{self.name}: {message}")

    @staticmethod
    def seeded(transform, rng: np.random.Generator):
        """Drive a MONAI randomizable from our generator instead of its own state"""
        return transform.set_random_state(seed=int(rng.integers(0, 2 ** 31 - 1)))

    @staticmethod
    def map_mr(stack: SliceStack, fn) -> np.ndarray:
        """
        Run fn on the (n_mr, H, W) block of MR channels; label channels
        come back bit-identical.
        """
        channels = stack.channels.copy()
        n_mr = stack.mr.shape[0]
        channels[:n_mr] = to_numpy(fn(stack.channels[:n_mr].astype(np.float32)))
        return channels

    @classmethod
    def map_mr_channels(cls, stack: SliceStack, fn) -> np.ndarray:
        """Like map_mr, one (1, H, W) channel at a time"""
        return cls.map_mr(stack, lambda mr: np.concatenate([to_numpy(fn(mr[c:c + 1])) for c in range(mr.shape[0])]))


def to_numpy(data) -> np.ndarray:
    """MetaTensor, tensor or array to a float32 array"""
    return np.asarray(convert_to_numpy(data), dtype=np.float32)


def pair(value, name: str) -> Tuple[float, float]:
    try:
        first, second = value
        return float(first), float(second)
    except (TypeError, ValueError) as e:
        raise InvalidConfigError(f"{name} must be a pair of numbers, got {value!r}") from e
