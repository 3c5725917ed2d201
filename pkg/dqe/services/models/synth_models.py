#!/usr/bin/env python3

"""
Synth Models - Phantom construction parameters and synthetic dataset settings
"""

from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Tuple

import numpy as np

from .volume_models import MODALITIES, Exam, TissueSeg
from ..exceptions import InvalidConfigError, InvalidParamsError


TISSUES = ('background', 'brain', 'necrosis', 'enhancing', 'edema')

# (mean, sigma) per tissue and modality, on a [0, 1] intensity scale
DEFAULT_INTENSITY_PROFILES: Dict[str, Dict[str, Tuple[float, float]]] = {
    't1':    {'background': (0.0, 0.01), 'brain': (0.6, 0.03), 'necrosis': (0.25, 0.03), 'enhancing': (0.45, 0.03), 'edema': (0.45, 0.03)},
    't1c':   {'background': (0.0, 0.01), 'brain': (0.6, 0.03), 'necrosis': (0.25, 0.03), 'enhancing': (0.95, 0.03), 'edema': (0.5, 0.03)},
    't2':    {'background': (0.0, 0.01), 'brain': (0.4, 0.03), 'necrosis': (0.9, 0.03), 'enhancing': (0.6, 0.03), 'edema': (0.8, 0.03)},
    'flair': {'background': (0.0, 0.01), 'brain': (0.4, 0.03), 'necrosis': (0.5, 0.03), 'enhancing': (0.7, 0.03), 'edema': (0.9, 0.03)},
}


def _default_profiles() -> Dict[str, Dict[str, Tuple[float, float]]]:
    return {m: dict(tissues) for m, tissues in DEFAULT_INTENSITY_PROFILES.items()}


@dataclass
class PhantomParams:
    """
    Geometry and contrast of a synthetic brain-tumor exam.

    Shell fractions are relative to the drawn tumor radius: voxels with a
    normalized radius below `core_fraction` are necrosis, below
    `rim_fraction` enhancing tumor, below `halo_fraction` edema.
    """
    grid_size: Tuple[int, int, int] = (48, 48, 48)
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    tumor_radius: Tuple[float, float] = (5.0, 8.0)
    core_fraction: float = 0.4
    rim_fraction: float = 1.0
    halo_fraction: float = 1.5
    deformation: float = 0.15
    head_fraction: float = 0.85
    intensity_profiles: Dict[str, Dict[str, Tuple[float, float]]] = field(default_factory=_default_profiles)
    seed: int = 0

    def __post_init__(self):
        self.grid_size = tuple(int(n) for n in self.grid_size)
        self.spacing = tuple(float(s) for s in self.spacing)
        self.tumor_radius = tuple(float(r) for r in self.tumor_radius)
        if len(self.grid_size) != 3 or min(self.grid_size) < 8:
            raise InvalidParamsError(f"grid_size must be three sides of at least 8 voxels, got {self.grid_size}")
        if len(self.spacing) != 3 or min(self.spacing) <= 0:
            raise InvalidParamsError(f"spacing must be three positive values, got {self.spacing}")
        low, high = self.tumor_radius
        if not 0 < low <= high:
            raise InvalidParamsError(f"tumor_radius must satisfy 0 < low <= high, got {self.tumor_radius}")
        if not 0 < self.core_fraction < self.rim_fraction < self.halo_fraction:
            raise InvalidParamsError(
                f"Shell fractions must be positive and nested, got core={self.core_fraction} "
                f"rim={self.rim_fraction} halo={self.halo_fraction}"
            )
        if not 0 <= self.deformation < 0.5:
            raise InvalidParamsError(f"deformation must lie in [0, 0.5), got {self.deformation}")
        if not 0 < self.head_fraction <= 1:
            raise InvalidParamsError(f"head_fraction must lie in (0, 1], got {self.head_fraction}")
        self._check_profiles()
        if 2 * self.tumor_extent_bound() + 3 > min(self.grid_size):
            raise InvalidParamsError(
                f"Tumor extent {self.tumor_extent_bound():.1f} voxels does not fit a {self.grid_size} grid"
            )

    def _check_profiles(self):
        missing = [m for m in MODALITIES if m not in self.intensity_profiles]
        if missing:
            raise InvalidParamsError(f"intensity_profiles lack modalities {missing}")
        for modality, tissues in self.intensity_profiles.items():
            absent = [t for t in TISSUES if t not in tissues]
            if absent:
                raise InvalidParamsError(f"intensity_profiles[{modality}] lacks tissues {absent}")
            for tissue, profile in tissues.items():
                mean, sigma = profile
                if not np.isfinite(mean) or not np.isfinite(sigma) or sigma < 0:
                    raise InvalidParamsError(f"intensity_profiles[{modality}][{tissue}] is invalid: {profile}")
                tissues[tissue] = (float(mean), float(sigma))

    def tumor_extent_bound(self) -> float:
        """Largest voxel distance from the tumor center any tumor voxel can have"""
        return self.tumor_radius[1] * (1.0 + self.deformation) * (self.halo_fraction + self.deformation)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PhantomParams':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown synth.phantom keys: {', '.join(unknown)}")
        values = dict(data)
        if 'intensity_profiles' in values:
            values['intensity_profiles'] = {
                m: {t: tuple(p) for t, p in tissues.items()}
                for m, tissues in values['intensity_profiles'].items()
            }
        try:
            return cls(**values)
        except InvalidParamsError as e:
            raise InvalidConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            'grid_size': list(self.grid_size),
            'spacing': list(self.spacing),
            'tumor_radius': list(self.tumor_radius),
            'core_fraction': self.core_fraction,
            'rim_fraction': self.rim_fraction,
            'halo_fraction': self.halo_fraction,
            'deformation': self.deformation,
            'head_fraction': self.head_fraction,
            'intensity_profiles': {
                m: {t: list(p) for t, p in tissues.items()} for m, tissues in self.intensity_profiles.items()
            },
            'seed': self.seed,
        }


@dataclass(frozen=True)
class TumorGeometry:
    """The random draw that places and shapes one phantom tumor"""
    center: Tuple[float, float, float]
    radius: float
    semi_axes: Tuple[float, float, float]
    rotation: np.ndarray


@dataclass
class SynthConfig:
    """How many phantom exams and degraded candidates a synthetic dataset holds"""
    n_exams: int = 75
    segs_per_exam: int = 4
    severity_range: Tuple[float, float] = (0.0, 1.0)
    phantom: PhantomParams = field(default_factory=PhantomParams)
    raters: int = 4
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.phantom, dict):
            self.phantom = PhantomParams.from_dict(self.phantom)
        if not isinstance(self.n_exams, int) or self.n_exams < 1:
            raise InvalidConfigError(f"synth.n_exams must be >= 1, got {self.n_exams}")
        if not isinstance(self.segs_per_exam, int) or self.segs_per_exam < 1:
            raise InvalidConfigError(f"synth.segs_per_exam must be >= 1, got {self.segs_per_exam}")
        if not isinstance(self.raters, int) or self.raters < 1:
            raise InvalidConfigError(f"synth.raters must be >= 1, got {self.raters}")
        low, high = (float(s) for s in self.severity_range)
        if not 0.0 <= low <= high <= 1.0:
            raise InvalidConfigError(f"synth.severity_range must lie within [0, 1], got {self.severity_range}")
        self.severity_range = (low, high)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown synth keys: {', '.join(unknown)}")
        values = dict(data)
        if 'severity_range' in values:
            values['severity_range'] = tuple(values['severity_range'])
        if isinstance(values.get('phantom'), dict):
            values['phantom'] = PhantomParams.from_dict(values['phantom'])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_exams': self.n_exams,
            'segs_per_exam': self.segs_per_exam,
            'severity_range': list(self.severity_range),
            'phantom': self.phantom.to_dict(),
            'raters': self.raters,
            'seed': self.seed,
        }


@dataclass
class SynthCandidate:
    """A degraded copy of the ground truth and the proxy rating it earned"""
    seg_id: str
    seg: TissueSeg
    severity: float
    stars: float


@dataclass
class SynthExam:
    """One phantom exam (ground truth attached) with its degraded candidates"""
    exam: Exam
    candidates: List[SynthCandidate] = field(default_factory=list)

    @property
    def exam_id(self) -> str:
        return self.exam.exam_id
