#!/usr/bin/env python3

"""
Metrics Service - Regression, overlap and agreement statistics
"""

import math
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.stats as sps
import sklearn.metrics as skm
from scipy import ndimage

from .exceptions import (
    EmptySeriesError, MetricsError, NegativeToleranceError, ShapeMismatchError, ZeroVarianceError
)
from .logger import Logger
from .models.metric_models import BLAND_ALTMAN_FACTOR, BlandAltmanStats, LinearFit, PairedSeries
from .models.rating_models import RatingAggregate, RatingKey
from .models.volume_models import TissueSeg
from .report_service import write_csv

log = Logger('metrics')


SCATTER_COLUMNS = ['kind', 'reference', 'prediction', 'slope', 'intercept', 'degenerate']


# ---------------------------------------------------------------- regression

def mae(series: PairedSeries) -> float:
    return float(skm.mean_absolute_error(series.references, series.predictions))


def rmse(series: PairedSeries) -> float:
    return float(math.sqrt(skm.mean_squared_error(series.references, series.predictions)))


def pearson_r(series: PairedSeries) -> float:
    """
    Sample Pearson correlation between predictions and references.

    Raises:
        ZeroVarianceError: either series is constant
    """
    if np.ptp(series.predictions) == 0 or np.ptp(series.references) == 0:
        raise ZeroVarianceError("Pearson r is undefined when a series has zero variance")
    r = sps.pearsonr(series.predictions, series.references)[0]
    return float(np.clip(r, -1.0, 1.0))


def pearson_or_none(series: PairedSeries, label: str = '') -> Optional[float]:
    """Pearson r, or None with a warning when it is undefined"""
    try:
        return pearson_r(series)
    except ZeroVarianceError:
        log.log_warn(f"Pearson r{' for ' + label if label else ''} undefined: zero variance")
        return None


def linear_fit(series: PairedSeries) -> LinearFit:
    """Least-squares predictions ~ references line; degenerate when references are constant"""
    if len(series) < 2 or np.ptp(series.references) == 0:
        return LinearFit(slope=float('nan'), intercept=float('nan'), degenerate=True)
    fit = sps.linregress(series.references, series.predictions)
    return LinearFit(slope=float(fit.slope), intercept=float(fit.intercept))


def bland_altman(series: PairedSeries) -> BlandAltmanStats:
    """
    Mean difference (prediction - reference), its sample standard deviation
    and the limits of agreement mean +- 1.96 SD. A single pair has SD 0.
    """
    diffs = series.differences
    if diffs.size == 0:
        raise EmptySeriesError("Bland-Altman needs at least one pair")
    mean_diff = float(np.mean(diffs))
    sd_diff = float(np.std(diffs, ddof=1)) if diffs.size > 1 else 0.0
    return BlandAltmanStats(
        mean_diff=mean_diff,
        sd_diff=sd_diff,
        loa_low=mean_diff - BLAND_ALTMAN_FACTOR * sd_diff,
        loa_high=mean_diff + BLAND_ALTMAN_FACTOR * sd_diff,
    )


def scatter_export(series: PairedSeries, path: str) -> LinearFit:
    """
    Write one data row per pair and one trailing fit row to CSV.

    Returns:
        The fitted line
    """
    fit = linear_fit(series)
    rows = [
        {'kind': 'data', 'reference': r, 'prediction': p}
        for r, p in zip(series.references, series.predictions)
    ]
    rows.append({
        'kind': 'fit',
        'slope': fit.slope,
        'intercept': fit.intercept,
        'degenerate': int(fit.degenerate),
    })
    frame = pd.DataFrame(rows, columns=SCATTER_COLUMNS)
    frame['degenerate'] = frame['degenerate'].astype('Int64')
    write_csv(path, frame, columns=SCATTER_COLUMNS)
    return fit


def rater_range_coverage(predictions: Mapping[RatingKey, float],
                         aggregates: Mapping[RatingKey, RatingAggregate]) -> float:
    """Fraction of predictions inside the [min, max] human rating range of their segmentation"""
    keys = [k for k in predictions if k in aggregates]
    if not keys:
        raise EmptySeriesError("No predictions with matching rating aggregates")
    inside = sum(aggregates[k].min_stars <= predictions[k] <= aggregates[k].max_stars for k in keys)
    return inside / len(keys)


# ---------------------------------------------------------------- overlap

def _same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Masks differ in shape: {a.shape} vs {b.shape}")


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """2|A and B| / (|A| + |B|); two empty masks agree perfectly (1.0)"""
    a = np.asarray(a) != 0
    b = np.asarray(b) != 0
    _same_shape(a, b)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def region_dice(gt: TissueSeg, candidate: TissueSeg) -> Dict[str, float]:
    """Dice on the whole tumor, tumor core and enhancing tumor regions"""
    g, c = gt.data, candidate.data
    return {
        'wt': dice(g > 0, c > 0),
        'tc': dice((g == 1) | (g == 4), (c == 1) | (c == 4)),
        'et': dice(g == 4, c == 4),
    }


def surface_voxels(mask: np.ndarray) -> np.ndarray:
    """
    Foreground elements with at least one background neighbour: face
    neighbours in 3D, all eight neighbours in 2D. Outside the grid counts
    as background.
    """
    mask = np.asarray(mask) != 0
    connectivity = 1 if mask.ndim == 3 else mask.ndim
    structure = ndimage.generate_binary_structure(mask.ndim, connectivity)
    eroded = ndimage.binary_erosion(mask, structure=structure, border_value=0)
    return mask & ~eroded


def surface_dice(a: np.ndarray, b: np.ndarray, spacing: Sequence[float], tolerance_mm: float = 1.0) -> float:
    """
    Symmetric surface Dice: the share of both boundaries lying within
    `tolerance_mm` of the other mask's boundary.

    Raises:
        ShapeMismatchError: masks or spacing disagree in dimensionality
        NegativeToleranceError: tolerance below zero
    """
    a = np.asarray(a) != 0
    b = np.asarray(b) != 0
    _same_shape(a, b)
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != a.ndim:
        raise ShapeMismatchError(f"Spacing {spacing} does not match {a.ndim}D masks")
    if tolerance_mm < 0:
        raise NegativeToleranceError(f"Tolerance must be >= 0 mm, got {tolerance_mm}")

    surface_a = surface_voxels(a)
    surface_b = surface_voxels(b)
    n_a, n_b = int(surface_a.sum()), int(surface_b.sum())
    if n_a == 0 and n_b == 0:
        return 1.0
    if n_a == 0 or n_b == 0:
        return 0.0

    # distance of every element to the nearest boundary element of the other mask
    to_b = ndimage.distance_transform_edt(~surface_b, sampling=spacing)
    to_a = ndimage.distance_transform_edt(~surface_a, sampling=spacing)
    close_a = int(np.count_nonzero(to_b[surface_a] <= tolerance_mm))
    close_b = int(np.count_nonzero(to_a[surface_b] <= tolerance_mm))
    return (close_a + close_b) / (n_a + n_b)


def series_from_mapping(predictions: Mapping, references: Mapping) -> PairedSeries:
    keys = sorted(set(predictions) & set(references))
    if not keys:
        raise MetricsError("No common keys between predictions and references")
    return PairedSeries.of([predictions[k] for k in keys], [references[k] for k in keys])
