"""
End-to-end quality checks on synthetic phantoms: agreement with proxy
ratings, separation of good from broken segmentations, and ordering of
predicted stars across degradation severities.
"""

import numpy as np
import pytest

from dqe.services.inference_service import QualityEstimator, classify_quality, curate, predict_batch
from dqe.services.metrics_service import mae, pearson_r
from dqe.services.models.metric_models import PairedSeries
from dqe.services.models.quality_models import CurationCandidate, Decision
from dqe.services.models.synth_models import SynthConfig
from dqe.services.synth_service import degrade_segmentation, generate_dataset, generate_phantom
from dqe.services.training_service import TrainingSample, train
from dqe.services.volume_service import extract_all_views

from conftest import small_phantom_params, tiny_train_config


N_EXAMS = 60
N_TRAIN = 48
HELD_OUT_SEED = 1000


def candidate_samples(synth_exams, config):
    samples = []
    for synth in synth_exams:
        for candidate in synth.candidates:
            exam = synth.exam.with_segmentation(candidate.seg)
            for stack in extract_all_views(exam, config.encoding, config.normalization).values():
                samples.append(TrainingSample(stack, candidate.stars, synth.exam_id, candidate.seg_id))
    return samples


@pytest.fixture(scope='module')
def synthetic():
    synth = SynthConfig(n_exams=N_EXAMS, segs_per_exam=4, phantom=small_phantom_params(), raters=2, seed=0)
    exams = list(generate_dataset(synth))
    return exams[:N_TRAIN], exams[N_TRAIN:]


@pytest.fixture(scope='module')
def estimator(synthetic):
    config = tiny_train_config(input_size=(32, 32), batch_size=16, epochs=60, learning_rate=1e-3)
    ckpt = train(candidate_samples(synthetic[0], config), config)
    return QualityEstimator.from_checkpoint(ckpt, device='cpu')


def held_out_exam(index: int):
    return generate_phantom(small_phantom_params(seed=HELD_OUT_SEED + index), exam_id=f"held_{index:02d}")


@pytest.mark.slow
def test_agreement_with_proxy_ratings(estimator, synthetic):
    test_exams = synthetic[1]
    items = [(synth.exam.with_segmentation(c.seg), c.seg_id) for synth in test_exams for c in synth.candidates]
    references = [c.stars for synth in test_exams for c in synth.candidates]
    predictions = [estimate.stars_mean for estimate in predict_batch(estimator, items)]

    series = PairedSeries.of(predictions, references)
    assert pearson_r(series) >= 0.8
    assert mae(series) <= 0.7


@pytest.mark.slow
def test_curation_separates_good_from_broken(estimator):
    rng = np.random.default_rng(7)
    candidates, good = [], {}
    for i in range(100):
        exam = held_out_exam(i)
        is_good = i < 50
        severity = rng.uniform(0.0, 0.1) if is_good else rng.uniform(0.8, 1.0)
        seg = degrade_segmentation(exam.seg, severity, seed=[i, 1])
        candidates.append(CurationCandidate(exam.exam_id, 's0', exam=exam.with_segmentation(seg)))
        good[(exam.exam_id, 's0')] = is_good

    estimates = predict_batch(estimator, [(c.exam, c.seg_id) for c in candidates])

    def accuracy(threshold):
        return np.mean([(classify_quality(e, threshold) is Decision.PASS) == good[(e.exam_id, e.seg_id)]
                         for e in estimates])

    threshold = max(sorted({e.stars_mean for e in estimates}), key=accuracy)
    result = curate(candidates, estimator, threshold)
    kept = set(result.kept_keys)
    correct = sum((key in kept) == is_good for key, is_good in good.items())
    assert correct / len(good) >= 0.9


@pytest.mark.slow
def test_stars_decrease_with_severity(estimator):
    severities = [0.0, 0.25, 0.5, 0.75, 1.0]
    exams = [held_out_exam(i) for i in range(20)]
    means = []
    for severity in severities:
        items = [(exam.with_segmentation(degrade_segmentation(exam.seg, severity, seed=[i, 2])), 's')
                 for i, exam in enumerate(exams)]
        means.append(np.mean([e.stars_mean for e in predict_batch(estimator, items)]))
    assert all(a > b for a, b in zip(means, means[1:]))
