#!/usr/bin/env python3

"""
Synth Service - Phantom brain-tumor exams, controlled segmentation degradation
and DSC-based proxy ratings
"""

import math
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.spatial.transform import Rotation

from .exceptions import InvalidSeverityError
from .logger import Logger
from .metrics_service import dice
from .models.rating_models import MAX_STARS, MIN_STARS, RatingRecord
from .models.synth_models import PhantomParams, SynthCandidate, SynthConfig, SynthExam, TumorGeometry
from .models.volume_models import Axis, Exam, MODALITIES, TissueSeg, Volume3D

log = Logger('synth')


Seed = Union[int, Sequence[int]]

NECROSIS, EDEMA, ENHANCING = 1, 2, 4

# tissue order used for the intensity lookup table
_TISSUE_CODES = {'background': 0, 'brain': 1, 'necrosis': 2, 'enhancing': 3, 'edema': 4}

_FACE_NEIGHBOURS = ndimage.generate_binary_structure(3, 1)

MAX_MORPH_ITERATIONS = 4
MAX_SHIFT_FRACTION = 0.25
MAX_DROPOUT_PROBABILITY = 0.5


# ---------------------------------------------------------------- phantoms

def _coordinates(shape: Tuple[int, int, int]) -> np.ndarray:
    """(3, X, Y, Z) voxel index grid"""
    return np.stack(np.meshgrid(*(np.arange(n, dtype=np.float64) for n in shape), indexing='ij'))


def tumor_geometry(params: PhantomParams, rng: np.random.Generator) -> TumorGeometry:
    """Draw radius, per-axis stretch, orientation and a center that keeps the tumor inside the grid"""
    low, high = params.tumor_radius
    radius = float(rng.uniform(low, high))
    stretch = rng.uniform(-params.deformation, params.deformation, size=3)
    semi_axes = tuple(float(radius * (1.0 + s)) for s in stretch)
    rotation = Rotation.random(None, rng).as_matrix()

    margin = params.tumor_extent_bound() + 1.0
    center = tuple(float(rng.uniform(margin, n - 1 - margin)) for n in params.grid_size)
    return TumorGeometry(center=center, radius=radius, semi_axes=semi_axes, rotation=rotation)


def _tumor_labels(params: PhantomParams, geometry: TumorGeometry, rng: np.random.Generator) -> np.ndarray:
    coords = _coordinates(params.grid_size)
    offset = coords - np.asarray(geometry.center).reshape(3, 1, 1, 1)
    local = np.einsum('ji,j...->i...', geometry.rotation, offset)
    rho = np.sqrt(sum((local[i] / geometry.semi_axes[i]) ** 2 for i in range(3)))

    # smooth bumps on the normalized radius, bounded by the deformation
    bumps = ndimage.gaussian_filter(rng.standard_normal(params.grid_size), sigma=3.0)
    peak = np.max(np.abs(bumps))
    if peak > 0:
        rho = rho + np.clip(bumps / peak, -1.0, 1.0) * params.deformation

    labels = np.zeros(params.grid_size, dtype=np.int16)
    labels[rho < params.halo_fraction] = EDEMA
    labels[rho < params.rim_fraction] = ENHANCING
    labels[rho < params.core_fraction] = NECROSIS
    return labels


def _head_mask(params: PhantomParams) -> np.ndarray:
    coords = _coordinates(params.grid_size)
    total = np.zeros(params.grid_size)
    for i, n in enumerate(params.grid_size):
        half = params.head_fraction * n / 2.0
        total += ((coords[i] - (n - 1) / 2.0) / half) ** 2
    return total <= 1.0


def generate_phantom(params: PhantomParams, exam_id: str = 'phantom') -> Exam:
    """
    Build a synthetic exam: an ellipsoidal head with a deformed tumor made of
    a necrotic core, an enhancing rim and an edema halo, imaged in four
    modalities with distinct tissue contrasts and Gaussian noise.

    The returned exam carries the ground-truth segmentation. Identical
    params (seed included) give an identical exam.
    """
    rng = np.random.default_rng(params.seed)
    geometry = tumor_geometry(params, rng)
    labels = _tumor_labels(params, geometry, rng)

    tissue = np.where(_head_mask(params), _TISSUE_CODES['brain'], _TISSUE_CODES['background'])
    tissue[labels == EDEMA] = _TISSUE_CODES['edema']
    tissue[labels == ENHANCING] = _TISSUE_CODES['enhancing']
    tissue[labels == NECROSIS] = _TISSUE_CODES['necrosis']

    volumes = []
    for modality in MODALITIES:
        profile = params.intensity_profiles[modality]
        means = np.zeros(len(_TISSUE_CODES))
        sigmas = np.zeros(len(_TISSUE_CODES))
        for name, code in _TISSUE_CODES.items():
            means[code], sigmas[code] = profile[name]
        noise = rng.standard_normal(params.grid_size)
        data = (means[tissue] + sigmas[tissue] * noise).astype(np.float32)
        volumes.append(Volume3D(data, params.spacing))

    seg = TissueSeg(labels, params.spacing)
    log.log_debug(
        f"Phantom {exam_id}: radius {geometry.radius:.2f}, center "
        f"({', '.join(f'{c:.1f}' for c in geometry.center)}), {int(seg.whole_tumor.sum())} tumor voxels"
    )
    return Exam(exam_id, *volumes, seg=seg)


# ---------------------------------------------------------------- degradation

def _check_severity(severity: float) -> float:
    try:
        value = float(severity)
    except (TypeError, ValueError) as e:
        raise InvalidSeverityError(f"Severity must be a number, got {severity!r}") from e
    if not 0.0 <= value <= 1.0:
        raise InvalidSeverityError(f"Severity must lie in [0, 1], got {severity}")
    return value


def degrade_segmentation(seg: TissueSeg, severity: float, seed: Seed) -> TissueSeg:
    """
    Corrupt a segmentation with severity-scaled errors.

    In order: boundary erosion or dilation (up to four voxels, grown voxels
    become edema), a random shift (up to a quarter of the grid per axis), a
    permutation of the tumor classes (probability = severity) and dropout of
    connected tumor components (probability = severity / 2 each).

    All random draws are taken before severity is applied, so one seed
    couples the corruptions across severities. Severity 0 returns an exact copy.

    Raises:
        InvalidSeverityError: severity outside [0, 1]
    """
    severity = _check_severity(severity)
    main_seq, dropout_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(main_seq)
    grow = rng.random() < 0.5
    shift_draw = rng.uniform(-1.0, 1.0, size=3)
    swap_draw = rng.random()
    permutation = rng.permutation([NECROSIS, EDEMA, ENHANCING])
    if np.array_equal(permutation, [NECROSIS, EDEMA, ENHANCING]):
        permutation = np.array([EDEMA, ENHANCING, NECROSIS])
    dropout_rng = np.random.default_rng(dropout_seq)

    data = seg.data.copy()
    if severity == 0.0:
        return TissueSeg(data, seg.spacing)

    iterations = int(round(MAX_MORPH_ITERATIONS * severity))
    if iterations > 0:
        tumor = data > 0
        if grow:
            grown = ndimage.binary_dilation(tumor, structure=_FACE_NEIGHBOURS, iterations=iterations)
            data[grown & ~tumor] = EDEMA
        else:
            kept = ndimage.binary_erosion(tumor, structure=_FACE_NEIGHBOURS, iterations=iterations, border_value=0)
            data[tumor & ~kept] = 0

    offset = np.rint(shift_draw * MAX_SHIFT_FRACTION * np.asarray(data.shape) * severity)
    if np.any(offset != 0):
        data = ndimage.shift(data, offset, order=0, mode='constant', cval=0)

    if swap_draw < severity:
        swapped = data.copy()
        for source, target in zip((NECROSIS, EDEMA, ENHANCING), permutation):
            swapped[data == source] = target
        data = swapped

    components, count = ndimage.label(data > 0)
    if count:
        dropped = np.flatnonzero(dropout_rng.random(count) < MAX_DROPOUT_PROBABILITY * severity) + 1
        data[np.isin(components, dropped)] = 0

    return TissueSeg(data.astype(np.int16), seg.spacing)


# ---------------------------------------------------------------- proxy ratings

def proxy_rating(gt: TissueSeg, candidate: TissueSeg) -> float:
    """
    Stars 1 + 5 * whole-tumor DSC: 6 for a perfect candidate, 1 for a disjoint one.

    Raises:
        ShapeMismatchError: grids differ in shape
    """
    return MIN_STARS + (MAX_STARS - MIN_STARS) * dice(gt.whole_tumor, candidate.whole_tumor)


def proxy_rating_records(exam_id: str, seg_id: str, stars: float, raters: int = 4) -> List[RatingRecord]:
    """
    Integer ratings from `raters` synthetic raters in each of the three views
    whose mean is within 1 / (2 * records) of `stars`.
    """
    views = [Axis.AXIAL, Axis.CORONAL, Axis.SAGITTAL]
    n = len(views) * raters
    total = int(math.floor(stars * n + 0.5))
    total = min(max(total, MIN_STARS * n), MAX_STARS * n)
    base, extra = divmod(total, n)

    records = []
    for i in range(n):
        view, rater = views[i % len(views)], i // len(views)
        records.append(RatingRecord(
            exam_id=exam_id,
            seg_id=seg_id,
            view=view,
            rater_id=f"r{rater + 1}",
            stars=base + (1 if i < extra else 0),
        ))
    return records


# ---------------------------------------------------------------- datasets

def stratified_severities(count: int, severity_range: Tuple[float, float], rng: np.random.Generator) -> List[float]:
    """One severity per stratum of the range, jittered within it"""
    low, high = severity_range
    jitter = rng.random(count)
    return [float(low + (j + jitter[j]) / count * (high - low)) for j in range(count)]


def exam_id_for(index: int) -> str:
    return f"synth_{index:03d}"


def generate_exam(config: SynthConfig, index: int) -> SynthExam:
    """Phantom exam `index` of the dataset and its degraded, proxy-rated candidates"""
    phantom_seed, severity_seed, degrade_seed = np.random.SeedSequence([config.seed, index]).generate_state(3)
    params = PhantomParams.from_dict({**config.phantom.to_dict(), 'seed': int(phantom_seed)})
    exam = generate_phantom(params, exam_id_for(index))

    severities = stratified_severities(config.segs_per_exam, config.severity_range,
                                       np.random.default_rng(int(severity_seed)))
    candidates = []
    for j, severity in enumerate(severities):
        seg = degrade_segmentation(exam.seg, severity, [int(degrade_seed), j])
        candidates.append(SynthCandidate(
            seg_id=f"s{j}",
            seg=seg,
            severity=severity,
            stars=proxy_rating(exam.seg, seg),
        ))
    return SynthExam(exam=exam, candidates=candidates)


def generate_dataset(config: SynthConfig) -> Iterator[SynthExam]:
    """Lazily generate every exam of a synthetic dataset; each exam depends only on (seed, index)"""
    for index in range(config.n_exams):
        yield generate_exam(config, index)
