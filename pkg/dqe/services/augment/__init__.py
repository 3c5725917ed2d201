#!/usr/bin/env python3

from .base_transform import BaseTransform, TransformKind
from .transform_factory import (
    TransformFactory, get_transform_factory, apply_pipeline,
    transform_spatial, transform_intensity, transform_artifact
)

__all__ = [
    'BaseTransform', 'TransformKind',
    'TransformFactory', 'get_transform_factory', 'apply_pipeline',
    'transform_spatial', 'transform_intensity', 'transform_artifact'
]
