#!/usr/bin/env python3

"""
Rating Models - Expert star ratings and their per-segmentation aggregates
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .volume_models import Axis
from ..exceptions import RatingFormatError


MIN_STARS = 1
MAX_STARS = 6

RatingKey = Tuple[str, str]  # (exam_id, seg_id)


@dataclass(frozen=True)
class RatingRecord:
    """One rater's star rating of one segmentation in one view"""
    exam_id: str
    seg_id: str
    view: Axis
    rater_id: str
    stars: int

    def __post_init__(self):
        if not self.exam_id or not self.seg_id:
            raise RatingFormatError(f"Rating record needs exam_id and seg_id, got {self.exam_id!r}/{self.seg_id!r}")
        view = self.view
        if view is None or (isinstance(view, str) and not view.strip()):
            view = Axis.AXIAL  # axial-only rating sessions leave the view empty
        try:
            object.__setattr__(self, 'view', Axis.parse(view))
        except Exception as e:
            raise RatingFormatError(f"Invalid view {self.view!r} for {self.exam_id}/{self.seg_id}") from e
        stars = self.stars
        try:
            as_int = int(stars)
        except (TypeError, ValueError):
            as_int = None
        if isinstance(stars, bool) or as_int is None or as_int != stars:
            raise RatingFormatError(f"Stars must be an integer, got {stars!r}")
        stars = as_int
        if not MIN_STARS <= stars <= MAX_STARS:
            raise RatingFormatError(f"Stars must lie in [{MIN_STARS}, {MAX_STARS}], got {stars}")
        object.__setattr__(self, 'stars', stars)

    @property
    def key(self) -> RatingKey:
        return (self.exam_id, self.seg_id)

    def to_dict(self) -> dict:
        return {
            'exam_id': self.exam_id,
            'seg_id': self.seg_id,
            'view': self.view.value,
            'rater_id': self.rater_id,
            'stars': self.stars,
        }


@dataclass(frozen=True)
class RatingAggregate:
    """Pooled statistics over all views and raters of one (exam, seg)"""
    exam_id: str
    seg_id: str
    mean_stars: float
    min_stars: int
    max_stars: int
    count: int

    @property
    def key(self) -> RatingKey:
        return (self.exam_id, self.seg_id)


@dataclass
class RatingSet:
    """A collection of rating records with lazily computed aggregates"""
    records: List[RatingRecord] = field(default_factory=list)

    def keys(self) -> List[RatingKey]:
        return sorted({record.key for record in self.records})

    def exam_ids(self) -> List[str]:
        return sorted({record.exam_id for record in self.records})

    @property
    def aggregates(self) -> Dict[RatingKey, RatingAggregate]:
        from ..ratings_service import aggregate
        return aggregate(self.records)

    def __len__(self) -> int:
        return len(self.records)
