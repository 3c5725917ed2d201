#!/usr/bin/env python3

"""
Services Module - Core DQE logic

- volume_service: NIfTI exams, center-of-mass slices, label encoding and normalization
- augment: slice-stack augmentation transforms behind a factory
- ratings_service: star-rating ingestion, aggregation and exam-level splits
- network_service / training_service / checkpoint_service: DenseNet regressors
- inference_service: multi-view prediction, threshold gating and curation
- metrics_service: regression, overlap and agreement metrics
- synth_service: phantom exams, segmentation degradation and proxy ratings
"""

from .exceptions import DQEError
from .logger import Logger, configure_logging
from .volume_service import (
    load_exam, load_segmentation, save_exam, center_of_mass, encode_labels,
    normalize_channel, extract_com_slices, extract_all_views, resize_stack
)
from .augment import apply_pipeline, get_transform_factory
from .ratings_service import read_ratings, write_ratings, aggregate, split_dataset
from .network_service import DenseRegressor, build_model, hyperparameter_grid, gradient_check, count_parameters
from .training_service import TrainingSample, train
from .checkpoint_service import save_checkpoint, load_checkpoint
from .inference_service import (
    QualityEstimator, predict_view, predict_exam, predict_batch, classify_quality, curate
)
from .metrics_service import (
    mae, rmse, pearson_r, dice, surface_dice, bland_altman, scatter_export, linear_fit,
    region_dice, rater_range_coverage
)
from .synth_service import generate_phantom, degrade_segmentation, proxy_rating, generate_dataset
from .optimizers import get_optimizer_factory

__all__ = [
    'DQEError', 'Logger', 'configure_logging',

    # volume_core
    'load_exam', 'load_segmentation', 'save_exam', 'center_of_mass', 'encode_labels',
    'normalize_channel', 'extract_com_slices', 'extract_all_views', 'resize_stack',

    # augment
    'apply_pipeline', 'get_transform_factory',

    # ratings
    'read_ratings', 'write_ratings', 'aggregate', 'split_dataset',

    # net
    'DenseRegressor', 'build_model', 'hyperparameter_grid', 'gradient_check', 'count_parameters',
    'TrainingSample', 'train', 'save_checkpoint', 'load_checkpoint', 'get_optimizer_factory',

    # infer
    'QualityEstimator', 'predict_view', 'predict_exam', 'predict_batch', 'classify_quality', 'curate',

    # metrics
    'mae', 'rmse', 'pearson_r', 'dice', 'surface_dice', 'bland_altman', 'scatter_export', 'linear_fit',
    'region_dice', 'rater_range_coverage',

    # synth
    'generate_phantom', 'degrade_segmentation', 'proxy_rating', 'generate_dataset',
]
