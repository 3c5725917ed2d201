#!/usr/bin/env python3

from .volume_models import (
    Axis, LabelEncoding, Normalization, Volume3D, TissueSeg, Exam, SliceStack,
    BRATS_LABELS, MODALITIES, MR_CHANNELS
)
from .augment_models import AugmentConfig, ALL_TRANSFORMS
from .rating_models import RatingRecord, RatingAggregate, RatingSet, MIN_STARS, MAX_STARS
from .train_models import Architecture, OptimizerType, TrainConfig, Checkpoint
from .quality_models import (
    QualityEstimate, Decision, CurationCandidate, CurationItem, CurationResult, clamp_stars
)
from .metric_models import PairedSeries, BlandAltmanStats, LinearFit
from .synth_models import PhantomParams, SynthConfig, TumorGeometry, SynthCandidate, SynthExam
from .run_models import RunConfig, PathsConfig, SweepSelection, RunRecord, RunStatus, EvalMode

__all__ = [
    'Axis', 'LabelEncoding', 'Normalization', 'Volume3D', 'TissueSeg', 'Exam', 'SliceStack',
    'BRATS_LABELS', 'MODALITIES', 'MR_CHANNELS',
    'AugmentConfig', 'ALL_TRANSFORMS',
    'RatingRecord', 'RatingAggregate', 'RatingSet', 'MIN_STARS', 'MAX_STARS',
    'Architecture', 'OptimizerType', 'TrainConfig', 'Checkpoint',
    'QualityEstimate', 'Decision', 'CurationCandidate', 'CurationItem', 'CurationResult', 'clamp_stars',
    'PairedSeries', 'BlandAltmanStats', 'LinearFit',
    'PhantomParams', 'SynthConfig', 'TumorGeometry', 'SynthCandidate', 'SynthExam',
    'RunConfig', 'PathsConfig', 'SweepSelection', 'RunRecord', 'RunStatus', 'EvalMode'
]
