#!/usr/bin/env python3

"""
Metric Models - Paired measurement series and the statistics computed over them
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from ..exceptions import EmptySeriesError, LengthMismatchError, MetricsError


BLAND_ALTMAN_FACTOR = 1.96


@dataclass
class PairedSeries:
    """Predictions and the references they are compared against"""
    predictions: np.ndarray
    references: np.ndarray

    def __post_init__(self):
        self.predictions = np.asarray(self.predictions, dtype=np.float64).ravel()
        self.references = np.asarray(self.references, dtype=np.float64).ravel()
        if self.predictions.shape != self.references.shape:
            raise LengthMismatchError(
                f"Series lengths differ: {self.predictions.size} predictions vs {self.references.size} references"
            )
        if self.predictions.size == 0:
            raise EmptySeriesError("Paired series is empty")
        if not (np.all(np.isfinite(self.predictions)) and np.all(np.isfinite(self.references))):
            raise MetricsError("Paired series contains NaN or Inf")

    @classmethod
    def of(cls, predictions: Sequence[float], references: Sequence[float]) -> 'PairedSeries':
        return cls(np.asarray(predictions), np.asarray(references))

    @property
    def differences(self) -> np.ndarray:
        return self.predictions - self.references

    def __len__(self) -> int:
        return int(self.predictions.size)


@dataclass(frozen=True)
class BlandAltmanStats:
    mean_diff: float
    sd_diff: float
    loa_low: float
    loa_high: float

    def as_tuple(self):
        return (self.mean_diff, self.sd_diff, self.loa_low, self.loa_high)

    def to_dict(self) -> Dict[str, float]:
        return {
            'mean_diff': self.mean_diff,
            'sd_diff': self.sd_diff,
            'loa_low': self.loa_low,
            'loa_high': self.loa_high,
        }


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line predictions ~ slope * references + intercept"""
    slope: float
    intercept: float
    degenerate: bool = False

    def to_dict(self) -> Dict[str, object]:
        return {'slope': self.slope, 'intercept': self.intercept, 'degenerate': self.degenerate}
