import numpy as np
import pytest

from dqe.services.dataset_service import (
    build_training_samples, discover_candidates, ground_truth_path, iter_segmented_exams, list_exams,
    list_segmentations, load_candidate, load_ground_truth
)
from dqe.services.exceptions import ExamNotFoundError
from dqe.services.ratings_service import aggregate, read_ratings
from dqe.services.synth_service import generate_exam

from conftest import small_synth_config, tiny_train_config


def test_layout(synth_root):
    root = str(synth_root)
    assert list_exams(root) == ['synth_000', 'synth_001', 'synth_002']
    assert list_segmentations(root, 'synth_001') == ['s0', 's1']
    assert (synth_root / 'synth_001' / 'gt.nii.gz').is_file()
    assert ground_truth_path(root, 'synth_001').endswith('gt.nii.gz')


def test_written_segmentations_match_generated(synth_root):
    case = generate_exam(small_synth_config(n_exams=3, segs_per_exam=2), 1)
    root = str(synth_root)
    assert np.array_equal(load_ground_truth(root, 'synth_001').data, case.exam.seg.data)
    exam = load_candidate(root, 'synth_001', 's1')
    assert np.array_equal(exam.seg.data, case.candidates[1].seg.data)
    assert np.allclose(exam.flair.data, case.exam.flair.data)


def test_discover_is_lazy(synth_root):
    candidates = discover_candidates(str(synth_root))
    assert [c.key for c in candidates][:2] == [('synth_000', 's0'), ('synth_000', 's1')]
    assert len(candidates) == 6
    assert all(c.exam is None for c in candidates)
    assert candidates[3].resolve().exam_id == 'synth_001'


def test_discover_missing_key(synth_root):
    with pytest.raises(ExamNotFoundError):
        discover_candidates(str(synth_root), keys=[('synth_000', 's7')])


def test_missing_root(tmp_path):
    with pytest.raises(ExamNotFoundError):
        list_exams(str(tmp_path / 'absent'))


def test_iter_groups_by_exam(synth_root):
    keys = [('synth_002', 's1'), ('synth_000', 's0'), ('synth_002', 's0')]
    seen = [(key, exam.exam_id) for key, exam in iter_segmented_exams(str(synth_root), keys)]
    assert seen == [
        (('synth_000', 's0'), 'synth_000'),
        (('synth_002', 's0'), 'synth_002'),
        (('synth_002', 's1'), 'synth_002'),
    ]


def test_training_samples(synth_root):
    aggregates = aggregate(read_ratings(str(synth_root.parent / 'ratings.csv')).records)
    config = tiny_train_config()
    samples = build_training_samples(str(synth_root), aggregates, config, keys=[('synth_000', 's0')])
    assert len(samples) == 3
    assert {s.stack.axis.value for s in samples} == {'axial', 'coronal', 'sagittal'}
    assert all(s.mean_stars == aggregates[('synth_000', 's0')].mean_stars for s in samples)
    assert all(s.stack.encoding is config.encoding for s in samples)
