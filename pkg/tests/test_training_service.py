import numpy as np
import pytest

from dqe.services.exceptions import EmptyDatasetError, NonFiniteLossError, TrainingError
from dqe.services.inference_service import QualityEstimator, predict_view
from dqe.services.models.augment_models import AugmentConfig
from dqe.services.models.volume_models import LabelEncoding
from dqe.services.synth_service import generate_phantom
from dqe.services.training_service import SliceDataset, TrainingSample, train
from dqe.services.volume_service import extract_com_slices

from conftest import small_phantom_params, tiny_train_config


def phantom_samples(labels, encoding='brats', normalization='percentile'):
    samples = []
    for seed, stars in enumerate(labels):
        exam = generate_phantom(small_phantom_params(seed=seed), exam_id=f"p{seed}")
        stack = extract_com_slices(exam, 'axial', encoding, normalization)
        samples.append(TrainingSample(stack=stack, mean_stars=stars, exam_id=exam.exam_id, seg_id='gt'))
    return samples


def test_overfits_four_samples():
    config = tiny_train_config(epochs=400, learning_rate=5e-3)
    ckpt = train(phantom_samples([1.5, 3.0, 4.5, 6.0]), config)
    assert len(ckpt.history) == 400
    assert ckpt.final_loss < 0.1
    assert ckpt.history[-1] < ckpt.history[0]


def test_constant_label_is_learned():
    samples = phantom_samples([4.0, 4.0, 4.0, 4.0])
    ckpt = train(samples, tiny_train_config(epochs=400, learning_rate=1e-2))
    assert ckpt.final_loss < 0.05
    estimator = QualityEstimator.from_checkpoint(ckpt, device='cpu')
    for sample in samples:
        assert predict_view(estimator, sample.stack) == pytest.approx(4.0, abs=0.3)


def test_seeded_runs_repeat():
    config = tiny_train_config(epochs=3)
    samples = phantom_samples([2.0, 5.0])
    first, second = train(samples, config), train(samples, config)
    assert first.history == second.history


def test_on_epoch_callback():
    seen = []
    train(phantom_samples([2.0, 4.0]), tiny_train_config(epochs=3), on_epoch=lambda e, loss: seen.append(e))
    assert seen == [1, 2, 3]


def test_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        train([], tiny_train_config())


def test_label_out_of_range():
    sample = phantom_samples([3.0])[0]
    sample.mean_stars = 7.0
    with pytest.raises(TrainingError):
        train([sample], tiny_train_config())


def test_preprocessing_must_match_config():
    samples = phantom_samples([3.0], encoding='single')
    with pytest.raises(TrainingError):
        train(samples, tiny_train_config(encoding=LabelEncoding.BRATS))


def test_non_finite_loss():
    sample = phantom_samples([3.0])[0]
    sample.stack.channels[0, 0, 0] = np.nan
    with pytest.raises(NonFiniteLossError):
        train([sample], tiny_train_config())


def test_augmented_dataset_is_reproducible():
    config = tiny_train_config(augment=AugmentConfig(seed=2))
    dataset = SliceDataset(phantom_samples([2.0, 5.0]), config)
    dataset.epoch = 3
    first, label = dataset[1]
    second, _ = dataset[1]
    assert first.shape == (7, 16, 16)
    assert float(label) == 5.0
    assert np.array_equal(first.numpy(), second.numpy())
    dataset.epoch = 4
    assert not np.array_equal(first.numpy(), dataset[1][0].numpy())
