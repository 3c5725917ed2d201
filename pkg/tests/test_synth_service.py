import numpy as np
import pytest

from dqe.services.exceptions import InvalidConfigError, InvalidParamsError, InvalidSeverityError, ShapeMismatchError
from dqe.services.metrics_service import dice
from dqe.services.models.synth_models import PhantomParams, SynthConfig
from dqe.services.models.volume_models import TissueSeg
from dqe.services.synth_service import (
    EDEMA, ENHANCING, NECROSIS, degrade_segmentation, exam_id_for, generate_dataset, generate_exam,
    generate_phantom, proxy_rating, proxy_rating_records, stratified_severities, tumor_geometry
)

from conftest import small_phantom_params, small_synth_config


def distances_from(center, shape):
    grid = np.stack(np.meshgrid(*(np.arange(n) for n in shape), indexing='ij'))
    return np.sqrt(sum((grid[i] - center[i]) ** 2 for i in range(3)))


class TestPhantom:
    def test_deterministic(self):
        params = small_phantom_params(seed=5)
        first, second = generate_phantom(params), generate_phantom(params)
        assert np.array_equal(first.seg.data, second.seg.data)
        for a, b in zip(first.modalities, second.modalities):
            assert np.array_equal(a.data, b.data)

    def test_seed_changes_exam(self):
        first = generate_phantom(small_phantom_params(seed=1))
        second = generate_phantom(small_phantom_params(seed=2))
        assert not np.array_equal(first.t1.data, second.t1.data)

    def test_labels_valid(self):
        for seed in range(5):
            labels = set(np.unique(generate_phantom(small_phantom_params(seed=seed)).seg.data))
            assert labels <= {0, NECROSIS, EDEMA, ENHANCING}
            assert {EDEMA, ENHANCING} <= labels

    def test_spherical_shells_nested(self):
        params = small_phantom_params(seed=3, tumor_radius=(4.0, 4.0), deformation=0.0)
        geometry = tumor_geometry(params, np.random.default_rng(params.seed))
        seg = generate_phantom(params).seg.data
        distance = distances_from(geometry.center, params.grid_size) / geometry.radius
        eps = 1e-9

        assert np.all(distance[seg == NECROSIS] < params.core_fraction + eps)
        enhancing = distance[seg == ENHANCING]
        assert np.all((enhancing > params.core_fraction - eps) & (enhancing < params.rim_fraction + eps))
        edema = distance[seg == EDEMA]
        assert np.all((edema > params.rim_fraction - eps) & (edema < params.halo_fraction + eps))

    def test_tumor_within_extent_bound(self):
        for seed in range(5):
            params = small_phantom_params(seed=seed)
            geometry = tumor_geometry(params, np.random.default_rng(seed))
            seg = generate_phantom(params).seg.data
            distance = distances_from(geometry.center, params.grid_size)
            assert distance[seg > 0].max() < params.tumor_extent_bound()

    def test_modalities_have_distinct_contrast(self, phantom):
        tumor = phantom.seg.data == ENHANCING
        brightest = [float(v.data[tumor].mean()) for v in phantom.modalities]
        assert brightest[1] > brightest[0]   # contrast enhancement on t1c

    def test_invalid_params(self):
        with pytest.raises(InvalidParamsError):
            PhantomParams(grid_size=(16, 16, 16), tumor_radius=(6.0, 8.0))
        with pytest.raises(InvalidParamsError):
            PhantomParams(core_fraction=1.2)
        with pytest.raises(InvalidConfigError):
            PhantomParams.from_dict({'grid_size': [4, 4, 4]})


class TestDegradation:
    @pytest.fixture
    def gt(self, phantom):
        return phantom.seg

    def test_zero_severity_is_identity(self, gt):
        out = degrade_segmentation(gt, 0.0, seed=9)
        assert np.array_equal(out.data, gt.data)
        assert out.data is not gt.data

    def test_deterministic_and_valid(self, gt):
        for severity in (0.3, 0.7, 1.0):
            first = degrade_segmentation(gt, severity, seed=[4, 2])
            second = degrade_segmentation(gt, severity, seed=[4, 2])
            assert np.array_equal(first.data, second.data)
            assert set(np.unique(first.data)) <= {0, 1, 2, 4}

    @pytest.mark.parametrize('severity', [-0.1, 1.5, 'high'])
    def test_invalid_severity(self, gt, severity):
        with pytest.raises(InvalidSeverityError):
            degrade_segmentation(gt, severity, seed=0)

    def test_dice_decreases_with_severity(self, gt):
        def mean_dice(severity):
            return np.mean([
                dice(gt.whole_tumor, degrade_segmentation(gt, severity, seed).whole_tumor) for seed in range(100)
            ])

        mild, strong, full = mean_dice(0.2), mean_dice(0.8), mean_dice(1.0)
        assert mild >= strong
        assert full < 0.5


class TestProxyRating:
    @staticmethod
    def seg_with(voxels):
        data = np.zeros((4, 4, 4), dtype=np.int16)
        for index in voxels:
            data[index] = 2
        return TissueSeg(data)

    def test_examples(self):
        gt = self.seg_with([(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3)])
        half = self.seg_with([(0, 0, 2), (0, 0, 3), (1, 0, 0), (1, 0, 1)])
        disjoint = self.seg_with([(3, 3, 3)])
        assert proxy_rating(gt, gt) == 6.0
        assert proxy_rating(gt, disjoint) == 1.0
        assert proxy_rating(gt, half) == pytest.approx(3.5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            proxy_rating(TissueSeg(np.zeros((4, 4, 4))), TissueSeg(np.zeros((4, 4, 5))))

    @pytest.mark.parametrize('stars', [1.0, 2.37, 3.5, 4.99, 6.0])
    def test_records_mean(self, stars):
        records = proxy_rating_records('e', 's0', stars, raters=4)
        assert len(records) == 12
        mean = np.mean([r.stars for r in records])
        assert abs(mean - stars) <= 1.0 / 24 + 1e-12
        assert {r.view.value for r in records} == {'axial', 'coronal', 'sagittal'}
        assert all(1 <= r.stars <= 6 for r in records)


class TestDataset:
    def test_stratified_severities(self):
        severities = stratified_severities(4, (0.0, 1.0), np.random.default_rng(0))
        for j, severity in enumerate(severities):
            assert j / 4 <= severity < (j + 1) / 4

    def test_exam_depends_only_on_seed_and_index(self):
        config = small_synth_config(n_exams=3)
        from_stream = list(generate_dataset(config))
        alone = generate_exam(config, 2)
        assert from_stream[2].exam_id == exam_id_for(2) == 'synth_002'
        assert np.array_equal(from_stream[2].exam.seg.data, alone.exam.seg.data)
        for a, b in zip(from_stream[2].candidates, alone.candidates):
            assert a.seg_id == b.seg_id
            assert np.array_equal(a.seg.data, b.seg.data)
            assert a.stars == b.stars

    def test_candidates(self):
        case = generate_exam(small_synth_config(segs_per_exam=3), 0)
        assert [c.seg_id for c in case.candidates] == ['s0', 's1', 's2']
        for candidate in case.candidates:
            assert 1.0 <= candidate.stars <= 6.0
            assert candidate.stars == pytest.approx(proxy_rating(case.exam.seg, candidate.seg))

    def test_invalid_config(self):
        with pytest.raises(InvalidConfigError):
            SynthConfig(n_exams=0)
        with pytest.raises(InvalidConfigError):
            SynthConfig.from_dict({'n_exams': 2, 'colour': 'blue'})
