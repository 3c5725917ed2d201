#!/usr/bin/env python3

"""
Volume Service - NIfTI exam I/O, center-of-mass slicing, label encoding and normalization

All operations are pure functions over their inputs and safe to call from
several threads at once.
"""

import math
import os
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import nibabel as nib
import numpy as np
from scipy import ndimage

from .exceptions import (
    EmptyMaskError, ExamNotFoundError, InvalidLabelValueError, NonFiniteIntensityError,
    OutputError, VolumeFormatError
)
from .logger import Logger
from .models.volume_models import (
    Axis, BRATS_LABELS, Exam, LabelEncoding, MODALITIES, Normalization, SliceStack, TissueSeg, Volume3D
)

log = Logger('volume')


PathLike = Union[str, os.PathLike]

# Low and high percentiles used by percentile normalization
PERCENTILE_LOW = 0.5
PERCENTILE_HIGH = 99.5

SINGLE_LABEL_LUT = {0: 0, 1: 1, 2: 2, 4: 3}

# NIfTI orientation code -> anatomical axis whose direction it names
_ORIENTATION_AXES = {
    'L': Axis.SAGITTAL, 'R': Axis.SAGITTAL,
    'A': Axis.CORONAL, 'P': Axis.CORONAL,
    'S': Axis.AXIAL, 'I': Axis.AXIAL,
}

# World direction of each anatomical axis when writing an affine
_WORLD_COLUMN = {Axis.SAGITTAL: 0, Axis.CORONAL: 1, Axis.AXIAL: 2}


# ---------------------------------------------------------------- loading

def _read_nifti(path: PathLike, integer: bool = False) -> Tuple[np.ndarray, Tuple[float, float, float], np.ndarray]:
    """Read one volume; returns (data, spacing, affine)"""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ExamNotFoundError(f"Volume file not found: {path}")
    try:
        image = nib.load(path)
        if integer:
            data = np.asanyarray(image.dataobj)
        else:
            data = image.get_fdata(dtype=np.float32)
        zooms = image.header.get_zooms()
        affine = image.affine
    except Exception as e:
        raise VolumeFormatError(f"Cannot decode {path} as NIfTI: {e}") from e

    # Trailing singleton dimensions (x, y, z, 1) are common in exported data
    while data.ndim > 3 and data.shape[-1] == 1:
        data = data[..., 0]
    if data.ndim != 3:
        raise VolumeFormatError(f"{path} is not a 3D volume (shape {data.shape})")
    spacing = tuple(float(z) for z in zooms[:3])
    return np.asarray(data), spacing, affine


def axis_map_from_affine(affine: Optional[np.ndarray]) -> Dict[Axis, int]:
    """
    Map anatomical axes to voxel indices using the NIfTI orientation codes.

    Falls back to the default convention (axial = third index) when the
    affine is missing or does not name three distinct directions.
    """
    if affine is None:
        return Axis.default_voxel_axes()
    try:
        codes = nib.aff2axcodes(affine)
    except Exception:
        return Axis.default_voxel_axes()

    mapping: Dict[Axis, int] = {}
    for index, code in enumerate(codes):
        axis = _ORIENTATION_AXES.get(code)
        if axis is None or axis in mapping:
            log.log_debug(f"Orientation codes {codes} are ambiguous, using default axes")
            return Axis.default_voxel_axes()
        mapping[axis] = index
    return mapping


def _affine_from_axis_map(spacing: Sequence[float], axis_map: Mapping[Axis, int]) -> np.ndarray:
    affine = np.zeros((4, 4))
    for axis, voxel_axis in axis_map.items():
        affine[_WORLD_COLUMN[axis], voxel_axis] = spacing[voxel_axis]
    affine[3, 3] = 1.0
    return affine


def load_exam(modality_paths: Union[Sequence[PathLike], Mapping[str, PathLike]],
              seg_path: PathLike,
              exam_id: Optional[str] = None) -> Exam:
    """
    Load four co-registered MR volumes and a tissue segmentation.

    Args:
        modality_paths: t1, t1c, t2 and flair paths, either in that order or keyed by name
        seg_path: integer segmentation with BraTS labels {0, 1, 2, 4}
        exam_id: defaults to the name of the directory holding the t1 volume

    Returns:
        Validated Exam

    Raises:
        ExamNotFoundError: a file does not exist
        VolumeFormatError: a file does not decode as a 3D volume
        ShapeMismatchError: grids disagree in shape or spacing
        InvalidLabelValueError: segmentation values outside {0, 1, 2, 4}
        NonFiniteIntensityError: NaN or Inf in an MR volume
    """
    if isinstance(modality_paths, Mapping):
        missing = [m for m in MODALITIES if m not in modality_paths]
        if missing:
            raise VolumeFormatError(f"Missing modality paths: {missing}")
        paths = [modality_paths[m] for m in MODALITIES]
    else:
        paths = list(modality_paths)
        if len(paths) != len(MODALITIES):
            raise VolumeFormatError(f"Expected {len(MODALITIES)} modality paths, got {len(paths)}")

    if exam_id is None:
        exam_id = os.path.basename(os.path.dirname(os.path.abspath(os.fspath(paths[0])))) or 'exam'

    volumes = []
    axis_map = None
    for name, path in zip(MODALITIES, paths):
        data, spacing, affine = _read_nifti(path)
        if not np.all(np.isfinite(data)):
            raise NonFiniteIntensityError(f"{name} volume {os.fspath(path)} contains NaN or Inf")
        volumes.append(Volume3D(data, spacing))
        if axis_map is None:
            axis_map = axis_map_from_affine(affine)

    seg_data, seg_spacing, _ = _read_nifti(seg_path, integer=True)
    try:
        seg = TissueSeg(seg_data, seg_spacing)
    except InvalidLabelValueError as e:
        raise InvalidLabelValueError(f"{os.fspath(seg_path)}: {e}") from e

    exam = Exam(exam_id, *volumes, seg=seg, axis_map=axis_map)
    log.log_debug(f"Loaded exam {exam_id} shape={exam.shape} spacing={exam.spacing}")
    return exam


def load_segmentation(path: PathLike) -> TissueSeg:
    data, spacing, _ = _read_nifti(path, integer=True)
    try:
        return TissueSeg(data, spacing)
    except InvalidLabelValueError as e:
        raise InvalidLabelValueError(f"{os.fspath(path)}: {e}") from e


def save_volume(data: np.ndarray, spacing: Sequence[float], path: PathLike,
                axis_map: Optional[Mapping[Axis, int]] = None):
    """Write one grid as gzip-compressed NIfTI-1"""
    affine = _affine_from_axis_map(spacing, axis_map or Axis.default_voxel_axes())
    image = nib.Nifti1Image(np.asarray(data), affine)
    image.header.set_zooms(tuple(float(s) for s in spacing))
    try:
        nib.save(image, os.fspath(path))
    except OSError as e:
        raise OutputError(f"Cannot write {os.fspath(path)}: {e}") from e


def save_exam(exam: Exam, directory: PathLike, seg_name: str = 'seg') -> Dict[str, str]:
    """
    Write an exam in the dataset layout load_exam reads:
    <directory>/{t1,t1c,t2,flair}.nii.gz and <directory>/<seg_name>.nii.gz

    Returns:
        Mapping of grid name to written path
    """
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    written = {}
    for name, volume in zip(MODALITIES, exam.modalities):
        path = os.path.join(directory, f"{name}.nii.gz")
        save_volume(volume.data.astype(np.float32), volume.spacing, path, exam.axis_map)
        written[name] = path
    seg_path = os.path.join(directory, f"{seg_name}.nii.gz")
    save_volume(exam.seg.data.astype(np.uint8), exam.seg.spacing, seg_path, exam.axis_map)
    written[seg_name] = seg_path
    return written


# ---------------------------------------------------------------- slicing

def center_of_mass(mask: np.ndarray) -> Tuple[float, ...]:
    """
    Unweighted mean voxel index of the foreground, per axis.

    Raises:
        EmptyMaskError: mask has no foreground voxel
    """
    mask = np.asarray(mask) != 0
    if not mask.any():
        raise EmptyMaskError("Cannot compute the center of mass of an empty mask")
    coords = np.nonzero(mask)
    return tuple(float(np.mean(c, dtype=np.float64)) for c in coords)


def round_half_down(value: float, size: int) -> int:
    """Nearest integer index, ties resolved downwards, clipped to [0, size - 1]"""
    index = math.ceil(value - 0.5)
    return int(min(max(index, 0), size - 1))


def com_slice_index(exam: Exam, axis: Axis) -> int:
    """Slice index through the whole-tumor center of mass, central slice when the tumor is empty"""
    voxel_axis = exam.axis_map[Axis.parse(axis)]
    size = exam.shape[voxel_axis]
    mask = exam.seg.whole_tumor
    if not mask.any():
        log.log_debug(f"Exam {exam.exam_id}: empty segmentation, using central {axis} slice")
        return size // 2
    return round_half_down(center_of_mass(mask)[voxel_axis], size)


def encode_labels(seg_slice: np.ndarray, mode: Union[LabelEncoding, str]) -> np.ndarray:
    """
    Turn a 2D BraTS label slice into network label channels.

    single -> one channel with codes {0, 1, 2, 3}
    brats  -> three binary channels (enhancing tumor, tumor core, whole tumor)

    Returns:
        float32 array shaped (channels, height, width)
    """
    mode = LabelEncoding.parse(mode)
    seg_slice = np.asarray(seg_slice)
    invalid = np.setdiff1d(np.unique(seg_slice), BRATS_LABELS)
    if invalid.size:
        raise InvalidLabelValueError(f"Label values {invalid.tolist()} outside {list(BRATS_LABELS)}")

    if mode is LabelEncoding.SINGLE:
        lut = np.zeros(max(BRATS_LABELS) + 1, dtype=np.float32)
        for value, code in SINGLE_LABEL_LUT.items():
            lut[value] = code
        return lut[seg_slice.astype(np.intp)][np.newaxis]

    enhancing = seg_slice == 4
    core = enhancing | (seg_slice == 1)
    whole = seg_slice > 0
    return np.stack([enhancing, core, whole]).astype(np.float32)


def intensity_bounds(channel: np.ndarray, method: Union[Normalization, str]) -> Tuple[float, float]:
    method = Normalization.parse(method)
    channel = np.asarray(channel, dtype=np.float64)
    if method is Normalization.MINMAX:
        return float(channel.min()), float(channel.max())
    low, high = np.percentile(channel, [PERCENTILE_LOW, PERCENTILE_HIGH])
    return float(low), float(high)


def normalize_channel(channel: np.ndarray, method: Union[Normalization, str],
                      bounds: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """
    Scale a 2D channel into [0, 1].

    minmax maps [min, max] linearly; percentile clips to the 0.5 / 99.5
    percentiles first. A channel without spread maps to all zeros.
    """
    channel = np.asarray(channel, dtype=np.float64)
    low, high = bounds if bounds is not None else intensity_bounds(channel, method)
    if not high > low:
        return np.zeros_like(channel)
    scaled = (np.clip(channel, low, high) - low) / (high - low)
    return np.clip(scaled, 0.0, 1.0)


def extract_com_slices(exam: Exam, axis: Union[Axis, str],
                       encoding: Union[LabelEncoding, str],
                       normalization: Union[Normalization, str]) -> SliceStack:
    """
    Build the network input for one view: the four MR channels and the encoded
    labels at the whole-tumor center-of-mass slice along `axis`.
    """
    axis = Axis.parse(axis)
    encoding = LabelEncoding.parse(encoding)
    normalization = Normalization.parse(normalization)

    index = com_slice_index(exam, axis)
    voxel_axis = exam.axis_map[axis]

    channels = []
    bounds = []
    for volume in exam.modalities:
        plane = np.take(volume.data, index, axis=voxel_axis)
        low_high = intensity_bounds(plane, normalization)
        channels.append(normalize_channel(plane, normalization, low_high))
        bounds.append(low_high)

    seg_plane = np.take(exam.seg.data, index, axis=voxel_axis)
    stacked = np.concatenate([np.stack(channels).astype(np.float32), encode_labels(seg_plane, encoding)])
    return SliceStack(
        channels=stacked,
        axis=axis,
        slice_index=index,
        encoding=encoding,
        normalization=normalization,
        intensity_bounds=bounds,
    )


def extract_all_views(exam: Exam, encoding: Union[LabelEncoding, str],
                      normalization: Union[Normalization, str]) -> Dict[Axis, SliceStack]:
    return {axis: extract_com_slices(exam, axis, encoding, normalization) for axis in Axis}


def resize_stack(stack: SliceStack, input_size: Sequence[int]) -> SliceStack:
    """Resample a stack to the network resolution: bilinear for MR, nearest for labels"""
    target = tuple(int(n) for n in input_size)
    if stack.spatial_shape == target:
        return stack
    factors = (1.0,) + tuple(t / s for t, s in zip(target, stack.spatial_shape))
    mr = ndimage.zoom(stack.mr.astype(np.float64), factors, order=1, mode='nearest', grid_mode=True)
    labels = ndimage.zoom(stack.labels, factors, order=0, mode='nearest', grid_mode=True)
    channels = np.concatenate([np.clip(mr, 0.0, 1.0).astype(np.float32), labels.astype(np.float32)])
    return stack.replace_channels(channels)
