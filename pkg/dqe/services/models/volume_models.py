#!/usr/bin/env python3

"""
Volume Models - Exams, tissue segmentations and 2D slice stacks
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import (
    InvalidConfigError, InvalidLabelValueError, NonFiniteIntensityError,
    ShapeMismatchError, VolumeFormatError
)


BRATS_LABELS = (0, 1, 2, 4)
MODALITIES = ('t1', 't1c', 't2', 'flair')
MR_CHANNELS = len(MODALITIES)


class _ParsableEnum(Enum):
    """Enum that parses its string values and reports bad ones as config errors"""

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            allowed = ', '.join(member.value for member in cls)
            raise InvalidConfigError(f"Unknown {cls.__name__} '{value}' (expected one of: {allowed})")

    def __str__(self) -> str:
        return self.value


class Axis(_ParsableEnum):
    """Anatomical viewing axis of a 2D slice"""
    AXIAL = "axial"
    CORONAL = "coronal"
    SAGITTAL = "sagittal"

    @classmethod
    def default_voxel_axes(cls) -> Dict['Axis', int]:
        """Voxel index carrying each anatomical direction when orientation metadata is absent"""
        return {cls.SAGITTAL: 0, cls.CORONAL: 1, cls.AXIAL: 2}


class LabelEncoding(_ParsableEnum):
    """How the tumor segmentation is presented to the network"""
    SINGLE = "single"
    BRATS = "brats"

    @property
    def label_channels(self) -> int:
        return 1 if self is LabelEncoding.SINGLE else 3

    @property
    def channel_names(self) -> List[str]:
        if self is LabelEncoding.SINGLE:
            return ['labels']
        return ['et', 'tc', 'wt']


class Normalization(_ParsableEnum):
    """Per-channel intensity normalization of MR slices"""
    MINMAX = "minmax"
    PERCENTILE = "percentile"


@dataclass
class Volume3D:
    """A 3D scalar grid with voxel spacing in millimeters"""
    data: np.ndarray
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise VolumeFormatError(f"Expected a 3D grid, got shape {self.data.shape}")
        if any(n < 1 for n in self.data.shape):
            raise VolumeFormatError(f"Grid shape must be positive, got {self.data.shape}")
        self.spacing = tuple(float(s) for s in self.spacing)
        if len(self.spacing) != 3 or any(not np.isfinite(s) or s <= 0 for s in self.spacing):
            raise VolumeFormatError(f"Voxel spacing must be three positive values, got {self.spacing}")
        if np.issubdtype(self.data.dtype, np.floating) and not np.all(np.isfinite(self.data)):
            raise NonFiniteIntensityError("Volume contains NaN or Inf intensities")

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(int(n) for n in self.data.shape)


@dataclass
class TissueSeg(Volume3D):
    """Integer tissue segmentation following the BraTS label convention"""

    def __post_init__(self):
        super().__post_init__()
        data = self.data
        if np.issubdtype(data.dtype, np.floating):
            rounded = np.rint(data)
            if not np.array_equal(rounded, data):
                raise InvalidLabelValueError("Segmentation contains non-integer values")
            data = rounded
        data = data.astype(np.int16, copy=False)
        invalid = np.setdiff1d(np.unique(data), BRATS_LABELS)
        if invalid.size:
            raise InvalidLabelValueError(
                f"Segmentation contains values {invalid.tolist()} outside {list(BRATS_LABELS)}"
            )
        self.data = data

    @property
    def whole_tumor(self) -> np.ndarray:
        return self.data > 0


@dataclass
class Exam:
    """Four co-registered MR modalities plus a tissue segmentation"""
    exam_id: str
    t1: Volume3D
    t1c: Volume3D
    t2: Volume3D
    flair: Volume3D
    seg: TissueSeg
    axis_map: Dict[Axis, int] = field(default_factory=Axis.default_voxel_axes)

    def __post_init__(self):
        reference = self.t1
        for name, grid in self.named_grids():
            if grid.shape != reference.shape:
                raise ShapeMismatchError(
                    f"Exam {self.exam_id}: {name} shape {grid.shape} differs from t1 shape {reference.shape}"
                )
            if not np.allclose(grid.spacing, reference.spacing, rtol=1e-4, atol=1e-5):
                raise ShapeMismatchError(
                    f"Exam {self.exam_id}: {name} spacing {grid.spacing} differs from t1 spacing {reference.spacing}"
                )
        if sorted(self.axis_map.values()) != [0, 1, 2]:
            raise VolumeFormatError(f"Exam {self.exam_id}: axis map {self.axis_map} is not a permutation")

    def named_grids(self) -> List[Tuple[str, Volume3D]]:
        return [('t1', self.t1), ('t1c', self.t1c), ('t2', self.t2), ('flair', self.flair), ('seg', self.seg)]

    @property
    def modalities(self) -> List[Volume3D]:
        return [self.t1, self.t1c, self.t2, self.flair]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.t1.shape

    @property
    def spacing(self) -> Tuple[float, float, float]:
        return self.t1.spacing

    def with_segmentation(self, seg: TissueSeg) -> 'Exam':
        """Same images, different candidate segmentation"""
        return Exam(self.exam_id, self.t1, self.t1c, self.t2, self.flair, seg, dict(self.axis_map))


@dataclass
class SliceStack:
    """
    2D network input: 4 MR channels followed by 1 or 3 label channels,
    shaped (channels, height, width).
    """
    channels: np.ndarray
    axis: Axis
    slice_index: int
    encoding: LabelEncoding
    normalization: Normalization
    intensity_bounds: Optional[List[Tuple[float, float]]] = None

    def __post_init__(self):
        self.axis = Axis.parse(self.axis)
        self.encoding = LabelEncoding.parse(self.encoding)
        self.normalization = Normalization.parse(self.normalization)
        expected = MR_CHANNELS + self.encoding.label_channels
        if self.channels.ndim != 3 or self.channels.shape[0] != expected:
            raise ShapeMismatchError(
                f"Slice stack for {self.encoding} encoding needs {expected} channels, got shape {self.channels.shape}"
            )

    @property
    def mr(self) -> np.ndarray:
        return self.channels[:MR_CHANNELS]

    @property
    def labels(self) -> np.ndarray:
        return self.channels[MR_CHANNELS:]

    @property
    def spatial_shape(self) -> Tuple[int, int]:
        return tuple(int(n) for n in self.channels.shape[1:])

    def replace_channels(self, channels: np.ndarray) -> 'SliceStack':
        """Copy of this stack's metadata around new channel data"""
        return SliceStack(
            channels=channels,
            axis=self.axis,
            slice_index=self.slice_index,
            encoding=self.encoding,
            normalization=self.normalization,
            intensity_bounds=self.intensity_bounds,
        )
