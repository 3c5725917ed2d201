"""
Shared fixtures: small phantom exams, slice stacks and tiny training configs
"""

import numpy as np
import pytest

from dqe.services.dataset_service import write_synth_exam
from dqe.services.models.augment_models import AugmentConfig
from dqe.services.models.synth_models import PhantomParams, SynthConfig
from dqe.services.models.train_models import Architecture, OptimizerType, TrainConfig
from dqe.services.models.volume_models import Exam, TissueSeg, Volume3D
from dqe.services.ratings_service import write_ratings
from dqe.services.synth_service import generate_dataset, generate_phantom, proxy_rating_records
from dqe.services.volume_service import extract_com_slices


SMALL_GRID = (24, 24, 24)


def small_phantom_params(seed: int = 0, **overrides) -> PhantomParams:
    values = {'grid_size': SMALL_GRID, 'tumor_radius': (3.0, 4.0), 'seed': seed}
    values.update(overrides)
    return PhantomParams(**values)


def small_synth_config(n_exams: int = 3, segs_per_exam: int = 2, seed: int = 0) -> SynthConfig:
    return SynthConfig(
        n_exams=n_exams,
        segs_per_exam=segs_per_exam,
        phantom=small_phantom_params(),
        raters=2,
        seed=seed,
    )


def tiny_train_config(**overrides) -> TrainConfig:
    values = {
        'arch': Architecture.DENSE_TINY,
        'optimizer': OptimizerType.ADAMW,
        'input_size': (16, 16),
        'batch_size': 4,
        'epochs': 2,
        'augment': AugmentConfig.disabled(),
    }
    values.update(overrides)
    return TrainConfig(**values)


def exam_from_seg(seg_data: np.ndarray, exam_id: str = 'exam', seed: int = 0) -> Exam:
    """Random MR volumes around a given label grid"""
    rng = np.random.default_rng(seed)
    shape = seg_data.shape
    volumes = [Volume3D(rng.random(shape).astype(np.float32)) for _ in range(4)]
    return Exam(exam_id, *volumes, seg=TissueSeg(seg_data))


@pytest.fixture
def phantom():
    return generate_phantom(small_phantom_params(seed=7), exam_id='phantom_007')


@pytest.fixture
def axial_stack(phantom):
    return extract_com_slices(phantom, 'axial', 'brats', 'percentile')


@pytest.fixture
def tiny_config():
    return tiny_train_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def synth_root(tmp_path):
    """Three phantom exams with two candidates each, written to disk with proxy ratings"""
    root = tmp_path / 'data'
    records = []
    for case in generate_dataset(small_synth_config(n_exams=3, segs_per_exam=2)):
        write_synth_exam(case, str(root))
        for candidate in case.candidates:
            records.extend(proxy_rating_records(case.exam_id, candidate.seg_id, candidate.stars, raters=2))
    write_ratings(records, str(tmp_path / 'ratings.csv'))
    return root
