#!/usr/bin/env python3

import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .base_controller import BaseController
from ..services.checkpoint_service import save_checkpoint
from ..services.dataset_service import build_training_samples, iter_segmented_exams
from ..services.evaluation_service import evaluate_against_ratings, write_predictions
from ..services.inference_service import QualityEstimator, predict_batch
from ..services.logger import Logger
from ..services.metrics_service import scatter_export
from ..services.models.quality_models import QualityEstimate
from ..services.models.rating_models import RatingAggregate, RatingKey
from ..services.models.run_models import RunConfig
from ..services.models.train_models import TrainConfig
from ..services.ratings_service import aggregate, read_ratings, split_dataset
from ..services.report_service import plot_bland_altman, plot_history, plot_scatter, write_csv, write_json
from ..services.training_service import TrainingSample, train

log = Logger('controller.train')


CHECKPOINT_FILENAME = 'checkpoint.dqe'
HISTORY_FILENAME = 'history.csv'
PREDICTIONS_FILENAME = 'test_predictions.csv'
SCATTER_FILENAME = 'scatter.csv'
REPORT_FILENAME = 'report.json'


@dataclass
class ExperimentSplit:
    """Rated segmentations divided by exam into training and held-out test keys"""
    aggregates: Dict[RatingKey, RatingAggregate]
    train_keys: List[RatingKey]
    test_keys: List[RatingKey]
    samples: Dict[Tuple[str, str], List[TrainingSample]] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: RunConfig) -> 'ExperimentSplit':
        ratings = read_ratings(config.paths.ratings_csv)
        aggregates = aggregate(ratings.records)
        train_ids, test_ids = split_dataset(ratings.exam_ids(), config.train_fraction, config.seed)
        train_set, test_set = set(train_ids), set(test_ids)
        return cls(
            aggregates=aggregates,
            train_keys=[k for k in sorted(aggregates) if k[0] in train_set],
            test_keys=[k for k in sorted(aggregates) if k[0] in test_set],
        )

    def training_samples(self, data_root: str, config: TrainConfig, progress: bool = False) -> List[TrainingSample]:
        """Samples for one preprocessing choice, built once and reused across grid points"""
        key = (config.encoding.value, config.normalization.value)
        if key not in self.samples:
            self.samples[key] = build_training_samples(data_root, self.aggregates, config, self.train_keys, progress)
        return self.samples[key]


def predict_keys(estimator: QualityEstimator, data_root: str, keys: Sequence[RatingKey],
                 progress: bool = False) -> List[QualityEstimate]:
    """Mean-of-views estimates for the given segmentations"""
    estimates = []
    for (_, seg_id), exam in iter_segmented_exams(data_root, keys, progress, desc="Predicting"):
        estimates.extend(predict_batch(estimator, [(exam, seg_id)]))
    return estimates


def train_and_evaluate(run: RunConfig, config: TrainConfig, split: ExperimentSplit, out_dir: str,
                       checkpoint_path: Optional[str] = None, progress: bool = False) -> Dict[str, Any]:
    """
    Train one configuration on the training keys, save its checkpoint and
    history, then report MAE, RMSE, Pearson r and Bland-Altman statistics on
    the held-out keys.
    """
    checkpoint_path = checkpoint_path or os.path.join(out_dir, CHECKPOINT_FILENAME)
    samples = split.training_samples(run.paths.data_root, config, progress)
    ckpt = train(samples, config, log_every=run.log_every, progress=progress)
    save_checkpoint(ckpt, checkpoint_path)
    write_csv(os.path.join(out_dir, HISTORY_FILENAME),
              [{'epoch': i + 1, 'loss': loss} for i, loss in enumerate(ckpt.history)], columns=['epoch', 'loss'])

    metrics: Dict[str, Any] = {'final_loss': ckpt.final_loss}
    if not split.test_keys:
        log.log_warn("No held-out exams; skipping internal evaluation")
        return metrics

    estimator = QualityEstimator.from_checkpoint(ckpt)
    estimates = predict_keys(estimator, run.paths.data_root, split.test_keys, progress)
    write_predictions(estimates, os.path.join(out_dir, PREDICTIONS_FILENAME))
    report = evaluate_against_ratings(estimates, split.aggregates)
    fit = scatter_export(report.series, os.path.join(out_dir, SCATTER_FILENAME))
    metrics.update(report.metrics)
    write_json(os.path.join(out_dir, REPORT_FILENAME), {
        'config': config.to_dict(),
        'tag': config.tag,
        'metrics': metrics,
        'fit': fit.to_dict(),
        'checkpoint': checkpoint_path,
    })

    if run.plot:
        refs, preds = report.series.references, report.series.predictions
        plot_scatter(refs, preds, os.path.join(out_dir, 'scatter.png'), fit.slope, fit.intercept)
        plot_bland_altman(refs, preds, os.path.join(out_dir, 'bland_altman.png'),
                          metrics['mean_diff'], metrics['loa_low'], metrics['loa_high'])
        plot_history(ckpt.history, os.path.join(out_dir, 'history.png'))
    return metrics


class TrainController(BaseController):
    """Split 80/20 by exam, train one configuration and evaluate it on the held-out exams"""

    command = 'train'
    ledgered = True

    def _execute(self) -> Dict[str, Any]:
        split = ExperimentSplit.from_config(self.config)
        log.log_info(
            f"Training on {len(split.train_keys)} segmentations, "
            f"holding out {len(split.test_keys)} for evaluation"
        )
        checkpoint_path = self.config.paths.checkpoint or self.out_path(CHECKPOINT_FILENAME)
        return train_and_evaluate(self.config, self.config.train, split, self.out_dir, checkpoint_path, self.progress)
