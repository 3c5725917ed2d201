#!/usr/bin/env python3

"""
Quality Models - Predicted star ratings, gating decisions and curation results
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

from .rating_models import MAX_STARS, MIN_STARS
from .volume_models import Axis, Exam
from ..exceptions import InferenceError, NonFiniteScoreError


REPORT_COLUMNS = ['exam_id', 'seg_id', 'stars_axial', 'stars_coronal', 'stars_sagittal', 'stars_mean', 'decision']


def clamp_stars(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteScoreError(f"Predicted score is not finite: {value}")
    return float(min(max(value, MIN_STARS), MAX_STARS))


class Decision(Enum):
    PASS = "pass"
    FAIL = "fail"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QualityEstimate:
    """Per-view predicted stars and their mean for one (exam, segmentation)"""
    exam_id: str
    seg_id: str
    stars_axial: float
    stars_coronal: float
    stars_sagittal: float

    def __post_init__(self):
        for name in ('stars_axial', 'stars_coronal', 'stars_sagittal'):
            object.__setattr__(self, name, clamp_stars(getattr(self, name)))

    @property
    def stars_mean(self) -> float:
        return (self.stars_axial + self.stars_coronal + self.stars_sagittal) / 3.0

    def view_stars(self, axis: Axis) -> float:
        return {
            Axis.AXIAL: self.stars_axial,
            Axis.CORONAL: self.stars_coronal,
            Axis.SAGITTAL: self.stars_sagittal,
        }[Axis.parse(axis)]

    @classmethod
    def from_views(cls, exam_id: str, seg_id: str, views: Dict[Axis, float]) -> 'QualityEstimate':
        return cls(exam_id, seg_id, views[Axis.AXIAL], views[Axis.CORONAL], views[Axis.SAGITTAL])

    def to_row(self, decision: Optional[Decision] = None) -> Dict[str, object]:
        return {
            'exam_id': self.exam_id,
            'seg_id': self.seg_id,
            'stars_axial': self.stars_axial,
            'stars_coronal': self.stars_coronal,
            'stars_sagittal': self.stars_sagittal,
            'stars_mean': self.stars_mean,
            'decision': decision.value if decision is not None else '',
        }


@dataclass
class CurationCandidate:
    """
    One (exam, segmentation) pair offered for curation.
    Either `exam` is given directly or `loader` produces it on demand,
    so large datasets are never fully resident in memory.
    """
    exam_id: str
    seg_id: str
    exam: Optional[Exam] = None
    loader: Optional[Callable[[], Exam]] = None

    def resolve(self) -> Exam:
        if self.exam is not None:
            return self.exam
        if self.loader is None:
            raise InferenceError(f"Candidate {self.exam_id}/{self.seg_id} has neither an exam nor a loader")
        return self.loader()

    @property
    def key(self):
        return (self.exam_id, self.seg_id)


@dataclass
class CurationItem:
    estimate: QualityEstimate
    decision: Decision

    def to_row(self) -> Dict[str, object]:
        return self.estimate.to_row(self.decision)


@dataclass
class CurationResult:
    """Kept and rejected (exam, seg) pairs plus the full per-item report"""
    threshold: float
    kept: List[CurationItem] = field(default_factory=list)
    rejected: List[CurationItem] = field(default_factory=list)
    report: List[CurationItem] = field(default_factory=list)

    @property
    def kept_keys(self):
        return [(item.estimate.exam_id, item.estimate.seg_id) for item in self.kept]

    @property
    def rejected_keys(self):
        return [(item.estimate.exam_id, item.estimate.seg_id) for item in self.rejected]
