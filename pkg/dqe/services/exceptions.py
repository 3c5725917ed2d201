#!/usr/bin/env python3

"""
DQE exceptions.

One hierarchy for every service; each module raises the subclasses of its
own group so callers can catch per concern or catch DQEError at the edge.
"""


class DQEError(Exception):
    """Base exception for all DQE errors."""
    pass


class ConfigurationError(DQEError):
    """Exception raised for invalid configuration values or unknown keys."""
    pass


class InvalidConfigError(ConfigurationError):
    """Exception raised when a config violates a range or enumeration."""
    pass


class OutputError(DQEError):
    """Exception raised when a report, dataset or manifest cannot be written."""
    pass


class InputNotFoundError(DQEError, FileNotFoundError):
    """Exception raised when a file or directory a command reads does not exist."""
    pass


# volume_core

class VolumeError(DQEError):
    """Base exception for volume loading and slicing errors."""
    pass


class ExamNotFoundError(VolumeError, InputNotFoundError):
    """Exception raised when an exam file does not exist."""
    pass


class VolumeFormatError(VolumeError):
    """Exception raised when a file does not decode as a 3D volume."""
    pass


class ShapeMismatchError(VolumeError):
    """Exception raised when grids that must agree in shape or spacing do not."""
    pass


class InvalidLabelValueError(VolumeError):
    """Exception raised for segmentation values outside {0, 1, 2, 4}."""
    pass


class NonFiniteIntensityError(VolumeError):
    """Exception raised when a modality contains NaN or Inf."""
    pass


class EmptyMaskError(VolumeError):
    """Exception raised when a mask has no foreground voxels."""
    pass


# ratings

class RatingsError(DQEError):
    """Base exception for rating data errors."""
    pass


class RatingFormatError(RatingsError):
    """Exception raised for malformed ratings CSV rows or records."""
    pass


class EmptyGroupError(RatingsError):
    """Exception raised when an aggregate key has no records."""
    pass


class InvalidFractionError(RatingsError):
    """Exception raised when a split fraction is outside (0, 1)."""
    pass


# net

class TrainingError(DQEError):
    """Base exception for model building and training errors."""
    pass


class EmptyDatasetError(TrainingError):
    """Exception raised when training receives no samples."""
    pass


class NonFiniteLossError(TrainingError):
    """Exception raised when the training loss becomes NaN or Inf."""
    pass


class InvalidSelectionError(TrainingError):
    """Exception raised for hyperparameter grid selections naming unknown values."""
    pass


class CheckpointError(DQEError):
    """Base exception for checkpoint persistence errors."""
    pass


class CheckpointIOError(CheckpointError):
    """Exception raised when a checkpoint cannot be read or written."""
    pass


class VersionMismatchError(CheckpointError):
    """Exception raised for checkpoints written by an unsupported format version."""
    pass


class CorruptCheckpointError(CheckpointError):
    """Exception raised for truncated or tampered checkpoint archives."""
    pass


# infer

class InferenceError(DQEError):
    """Base exception for quality prediction errors."""
    pass


class ConfigMismatchError(InferenceError):
    """Exception raised when input preprocessing differs from the checkpoint's."""
    pass


class NonFiniteScoreError(InferenceError):
    """Exception raised when the network produces a NaN or infinite score."""
    pass


class InvalidThresholdError(InferenceError):
    """Exception raised for thresholds outside the star scale."""
    pass


class EmptyInputError(InferenceError):
    """Exception raised when curation receives no candidates."""
    pass


# metrics

class MetricsError(DQEError):
    """Base exception for metric computation errors."""
    pass


class LengthMismatchError(MetricsError):
    """Exception raised when paired series differ in length."""
    pass


class EmptySeriesError(MetricsError):
    """Exception raised for empty paired series."""
    pass


class ZeroVarianceError(MetricsError):
    """Exception raised when a correlation input has no variance."""
    pass


class NegativeToleranceError(MetricsError):
    """Exception raised for a negative surface distance tolerance."""
    pass


# synth

class SynthError(DQEError):
    """Base exception for phantom generation errors."""
    pass


class InvalidParamsError(SynthError):
    """Exception raised for invalid phantom parameters."""
    pass


class InvalidSeverityError(SynthError):
    """Exception raised for degradation severities outside [0, 1]."""
    pass


# eval

class EvaluationError(DQEError):
    """Base exception for prediction/reference joins."""
    pass


class KeyMismatchError(EvaluationError):
    """Exception raised when prediction ids cannot be joined to references."""
    pass


class EmptyJoinError(EvaluationError):
    """Exception raised when predictions and references share no ids."""
    pass
