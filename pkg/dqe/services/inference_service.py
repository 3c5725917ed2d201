#!/usr/bin/env python3

"""
Inference Service - Multi-view star prediction, threshold gating and dataset curation
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from .exceptions import ConfigMismatchError, EmptyInputError, InvalidThresholdError
from .logger import Logger
from .models.quality_models import (
    CurationCandidate, CurationItem, CurationResult, Decision, QualityEstimate, clamp_stars
)
from .models.rating_models import MAX_STARS, MIN_STARS
from .models.train_models import Checkpoint, TrainConfig
from .models.volume_models import Axis, Exam, SliceStack
from .network_service import DenseRegressor, build_model, select_device
from .checkpoint_service import load_checkpoint
from .volume_service import extract_all_views, resize_stack

log = Logger('inference')


DEFAULT_BATCH_SIZE = 48


class QualityEstimator:
    """
    A trained regressor together with the preprocessing it was trained with.

    The model is put in eval mode once and never modified afterwards, so
    concurrent predictions from several threads are safe.
    """

    def __init__(self, model: DenseRegressor, config: TrainConfig, device: Optional[str] = None):
        self.config = config
        self.device = select_device(device)
        self.model = model.to(self.device).eval()

    @classmethod
    def from_checkpoint(cls, ckpt, device: Optional[str] = None) -> 'QualityEstimator':
        """Build from a Checkpoint or a checkpoint path"""
        if not isinstance(ckpt, Checkpoint):
            ckpt = load_checkpoint(ckpt)
        model = build_model(ckpt.config)
        model.load_state_dict(ckpt.weights)
        return cls(model, ckpt.config, device)

    def check_stack(self, stack: SliceStack):
        """
        Raises:
            ConfigMismatchError: stack preprocessing differs from the training preprocessing
        """
        if stack.encoding is not self.config.encoding:
            raise ConfigMismatchError(
                f"Stack uses {stack.encoding} label encoding, checkpoint was trained with {self.config.encoding}"
            )
        if stack.normalization is not self.config.normalization:
            raise ConfigMismatchError(
                f"Stack uses {stack.normalization} normalization, checkpoint was trained with {self.config.normalization}"
            )

    def raw_scores(self, stacks: Sequence[SliceStack], batch_size: int = DEFAULT_BATCH_SIZE) -> np.ndarray:
        """Unclamped network outputs, one per stack"""
        for stack in stacks:
            self.check_stack(stack)
        if not stacks:
            return np.zeros(0, dtype=np.float64)
        inputs = [resize_stack(s, self.config.input_size).channels for s in stacks]
        outputs = []
        with torch.no_grad():
            for start in range(0, len(inputs), batch_size):
                batch = torch.from_numpy(np.ascontiguousarray(np.stack(inputs[start:start + batch_size]), dtype=np.float32))
                outputs.append(self.model(batch.to(self.device)).double().cpu().numpy())
        return np.concatenate(outputs)

    def predict_view(self, stack: SliceStack) -> float:
        return predict_view(self, stack)

    def predict_exam(self, exam: Exam, seg_id: str = '') -> QualityEstimate:
        return predict_exam(self, exam, seg_id)


def predict_view(estimator: QualityEstimator, stack: SliceStack) -> float:
    """
    Predicted stars for one slice stack, clamped to [1, 6].

    Raises:
        ConfigMismatchError: stack encoding or normalization differs from the checkpoint's
        NonFiniteScoreError: the network output is NaN or infinite
    """
    return clamp_stars(estimator.raw_scores([stack])[0])


def predict_batch(estimator: QualityEstimator, items: Sequence[Tuple[Exam, str]],
                  batch_size: int = DEFAULT_BATCH_SIZE) -> List[QualityEstimate]:
    """
    Estimates for many (exam, seg_id) pairs, batching all their views together.
    Results equal per-exam prediction up to floating-point reduction order.
    """
    views = list(Axis)
    stacks = []
    for exam, _ in items:
        per_view = extract_all_views(exam, estimator.config.encoding, estimator.config.normalization)
        stacks.extend(per_view[axis] for axis in views)
    scores = estimator.raw_scores(stacks, batch_size)

    estimates = []
    for i, (exam, seg_id) in enumerate(items):
        chunk = scores[i * len(views):(i + 1) * len(views)]
        estimates.append(QualityEstimate.from_views(exam.exam_id, seg_id, dict(zip(views, chunk))))
    return estimates


def predict_exam(estimator: QualityEstimator, exam: Exam, seg_id: str = '') -> QualityEstimate:
    """Axial, coronal and sagittal center-of-mass predictions and their mean"""
    return predict_batch(estimator, [(exam, seg_id)])[0]


def _check_threshold(threshold: float) -> float:
    try:
        value = float(threshold)
    except (TypeError, ValueError) as e:
        raise InvalidThresholdError(f"Threshold must be a number, got {threshold!r}") from e
    if not MIN_STARS <= value <= MAX_STARS:
        raise InvalidThresholdError(f"Threshold must lie in [{MIN_STARS}, {MAX_STARS}], got {threshold}")
    return value


def classify_quality(estimate: QualityEstimate, threshold: float) -> Decision:
    """Pass iff the mean predicted stars reach the threshold (inclusive)"""
    threshold = _check_threshold(threshold)
    return Decision.PASS if estimate.stars_mean >= threshold else Decision.FAIL


def curate(candidates: Sequence[CurationCandidate], estimator: QualityEstimator, threshold: float,
           num_workers: int = 0) -> CurationResult:
    """
    Partition candidate segmentations into kept and rejected by thresholding
    their predicted quality.

    Args:
        candidates: (exam, segmentation) pairs, loaded lazily when they carry a loader
        estimator: trained quality estimator
        threshold: minimum mean stars to keep a segmentation
        num_workers: threads that load and score candidates in parallel (0: sequential)

    Raises:
        EmptyInputError: no candidates
        InvalidThresholdError: threshold outside [1, 6]
    """
    threshold = _check_threshold(threshold)
    if not candidates:
        raise EmptyInputError("Curation needs at least one candidate")

    def score(candidate: CurationCandidate) -> QualityEstimate:
        return predict_exam(estimator, candidate.resolve(), candidate.seg_id)

    if num_workers > 0:
        with ThreadPoolExecutor(max_workers=num_workers) as pool:
            estimates = list(pool.map(score, candidates))
    else:
        estimates = [score(c) for c in candidates]

    result = CurationResult(threshold=threshold)
    for estimate in estimates:
        item = CurationItem(estimate=estimate, decision=classify_quality(estimate, threshold))
        result.report.append(item)
        (result.kept if item.decision is Decision.PASS else result.rejected).append(item)

    log.log_info(
        f"Curated {len(result.report)} segmentations at threshold {threshold}: "
        f"{len(result.kept)} kept, {len(result.rejected)} rejected"
    )
    return result
