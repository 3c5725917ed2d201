#!/usr/bin/env python3

"""
Evaluation Service - Prediction files and their comparison with ratings or ground truth
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd
from tqdm import tqdm

from .dataset_service import ground_truth_path, load_ground_truth, segmentation_path
from .exceptions import EmptyJoinError, EvaluationError, InputNotFoundError, KeyMismatchError
from .logger import Logger
from .metrics_service import (
    bland_altman, dice, mae, pearson_or_none, rater_range_coverage, rmse, surface_dice
)
from .models.metric_models import PairedSeries
from .models.quality_models import REPORT_COLUMNS, Decision, QualityEstimate
from .models.rating_models import RatingAggregate, RatingKey
from .models.volume_models import Axis
from .report_service import write_csv
from .volume_service import load_segmentation

log = Logger('evaluation')


PREDICTION_COLUMNS = REPORT_COLUMNS[:-1]
SEG_CASE_COLUMNS = ['exam_id', 'seg_id', 'stars_axial', 'stars_coronal', 'stars_sagittal', 'stars_mean',
                    'dice', 'surface_dice']


@dataclass
class EvaluationReport:
    """Scalar metrics, the paired series behind them and optional per-case rows"""
    mode: str
    metrics: Dict[str, Optional[float]] = field(default_factory=dict)
    series: Optional[PairedSeries] = None
    cases: List[Dict[str, object]] = field(default_factory=list)


def write_predictions(estimates: Sequence[QualityEstimate], path: str,
                      decisions: Optional[Sequence[Decision]] = None):
    """Prediction rows; the decision column is written only for curation reports"""
    if decisions is None:
        rows = [{k: v for k, v in e.to_row().items() if k != 'decision'} for e in estimates]
        write_csv(path, rows, columns=PREDICTION_COLUMNS)
    else:
        rows = [e.to_row(d) for e, d in zip(estimates, decisions)]
        write_csv(path, rows, columns=REPORT_COLUMNS)


def read_predictions(path: str) -> List[QualityEstimate]:
    """
    Raises:
        InputNotFoundError: file does not exist
        EvaluationError: missing columns, duplicate keys or unreadable numbers
    """
    if not os.path.isfile(path):
        raise InputNotFoundError(f"Predictions CSV not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={'exam_id': str, 'seg_id': str}, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise EvaluationError(f"Cannot parse predictions {path}: {e}") from e

    missing = [c for c in PREDICTION_COLUMNS[:-1] if c not in frame.columns]
    if missing:
        raise EvaluationError(f"Predictions {path} lack columns {missing}")

    estimates = []
    for line, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            estimates.append(QualityEstimate(
                exam_id=row.exam_id,
                seg_id=row.seg_id,
                stars_axial=float(row.stars_axial),
                stars_coronal=float(row.stars_coronal),
                stars_sagittal=float(row.stars_sagittal),
            ))
        except (TypeError, ValueError) as e:
            raise EvaluationError(f"{path}:{line}: unreadable star value: {e}") from e

    keys = [(e.exam_id, e.seg_id) for e in estimates]
    if len(set(keys)) != len(keys):
        raise EvaluationError(f"Predictions {path} contain duplicate (exam_id, seg_id) rows")
    log.log_debug(f"Read {len(estimates)} predictions from {path}")
    return estimates


def join_keys(predicted: Sequence[RatingKey], references: Sequence[RatingKey]) -> List[RatingKey]:
    """
    Keys present on both sides, sorted.

    Raises:
        EmptyJoinError: no key in common
        KeyMismatchError: some predictions have no reference
    """
    reference_set = set(references)
    common = sorted(k for k in set(predicted) if k in reference_set)
    if not common:
        raise EmptyJoinError("Predictions and references share no (exam_id, seg_id) pair")
    unmatched = sorted(set(predicted) - reference_set)
    if unmatched:
        shown = ', '.join(f"{e}/{s}" for e, s in unmatched[:5])
        more = f" and {len(unmatched) - 5} more" if len(unmatched) > 5 else ''
        raise KeyMismatchError(f"{len(unmatched)} predictions have no reference: {shown}{more}")
    return common


def evaluate_against_ratings(estimates: Sequence[QualityEstimate],
                             aggregates: Dict[RatingKey, RatingAggregate]) -> EvaluationReport:
    """MAE, RMSE, Pearson r and Bland-Altman of mean predicted vs. mean human stars"""
    by_key = {(e.exam_id, e.seg_id): e for e in estimates}
    keys = join_keys(list(by_key), list(aggregates))
    series = PairedSeries.of([by_key[k].stars_mean for k in keys], [aggregates[k].mean_stars for k in keys])

    agreement = bland_altman(series)
    metrics: Dict[str, Optional[float]] = {
        'n': float(len(series)),
        'mae': mae(series),
        'rmse': rmse(series),
        'pearson_r': pearson_or_none(series, 'predicted vs. rated stars'),
        'rater_range_coverage': rater_range_coverage({k: by_key[k].stars_mean for k in keys}, aggregates),
    }
    metrics.update(agreement.to_dict())
    log.log_info(
        f"Ratings evaluation on {len(series)} segmentations: MAE {metrics['mae']:.4f}, "
        f"RMSE {metrics['rmse']:.4f}, r {metrics['pearson_r']}"
    )
    return EvaluationReport(mode='ratings', metrics=metrics, series=series)


def evaluate_against_segmentations(estimates: Sequence[QualityEstimate], data_root: str,
                                   tolerance_mm: float = 1.0, progress: bool = False) -> EvaluationReport:
    """
    Whole-tumor DSC and surface DSC of each candidate against its exam's
    ground truth, and their correlation with the predicted stars (mean and
    per view).

    Raises:
        EmptyJoinError: no prediction has a ground truth on disk
        KeyMismatchError: some predictions have no ground truth
    """
    by_key = {(e.exam_id, e.seg_id): e for e in estimates}
    available = [k for k in by_key if os.path.isfile(ground_truth_path(data_root, k[0]))]
    keys = join_keys(list(by_key), available)

    cases = []
    gt_exam, gt = None, None
    for exam_id, seg_id in tqdm(keys, desc="Scoring", unit="seg", disable=not progress):
        if exam_id != gt_exam:
            gt_exam, gt = exam_id, load_ground_truth(data_root, exam_id)
        candidate = load_segmentation(segmentation_path(data_root, exam_id, seg_id))
        row = {k: v for k, v in by_key[(exam_id, seg_id)].to_row().items() if k != 'decision'}
        row['dice'] = dice(gt.whole_tumor, candidate.whole_tumor)
        row['surface_dice'] = surface_dice(gt.whole_tumor, candidate.whole_tumor, gt.spacing, tolerance_mm)
        cases.append(row)

    dsc = [c['dice'] for c in cases]
    sdsc = [c['surface_dice'] for c in cases]
    stars = [c['stars_mean'] for c in cases]
    metrics: Dict[str, Optional[float]] = {
        'n': float(len(cases)),
        'mean_dice': sum(dsc) / len(dsc),
        'mean_surface_dice': sum(sdsc) / len(sdsc),
        'pearson_stars_dice': pearson_or_none(PairedSeries.of(stars, dsc), 'stars vs. DSC'),
        'pearson_stars_surface_dice': pearson_or_none(PairedSeries.of(stars, sdsc), 'stars vs. SDSC'),
    }
    for axis in Axis:
        view = [c[f"stars_{axis.value}"] for c in cases]
        metrics[f"pearson_{axis.value}_dice"] = pearson_or_none(PairedSeries.of(view, dsc), f"{axis} stars vs. DSC")

    log.log_info(
        f"Segmentation evaluation on {len(cases)} candidates: r(stars, DSC) {metrics['pearson_stars_dice']}, "
        f"r(stars, SDSC) {metrics['pearson_stars_surface_dice']} at {tolerance_mm} mm"
    )
    return EvaluationReport(mode='seg', metrics=metrics, series=PairedSeries.of(stars, dsc), cases=cases)
