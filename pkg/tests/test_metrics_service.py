import math

import numpy as np
import pandas as pd
import pytest

from dqe.services.exceptions import (
    EmptySeriesError, LengthMismatchError, NegativeToleranceError, ShapeMismatchError, ZeroVarianceError
)
from dqe.services.metrics_service import (
    SCATTER_COLUMNS, bland_altman, dice, linear_fit, mae, pearson_r, rater_range_coverage, region_dice,
    rmse, scatter_export, surface_dice, surface_voxels
)
from dqe.services.models.metric_models import PairedSeries
from dqe.services.models.rating_models import RatingAggregate
from dqe.services.models.volume_models import TissueSeg


def random_series(rng, n=None):
    n = n or int(rng.integers(2, 1000))
    return PairedSeries.of(rng.uniform(1, 6, n), rng.uniform(1, 6, n))


def brute_force_surface_dice(a, b, spacing, tolerance):
    """All-pairs distances between boundary elements"""
    points_a = np.argwhere(surface_voxels(a)) * np.asarray(spacing)
    points_b = np.argwhere(surface_voxels(b)) * np.asarray(spacing)
    pairwise = np.sqrt(((points_a[:, None, :] - points_b[None, :, :]) ** 2).sum(axis=-1))
    close_a = np.count_nonzero(pairwise.min(axis=1) <= tolerance)
    close_b = np.count_nonzero(pairwise.min(axis=0) <= tolerance)
    return (close_a + close_b) / (len(points_a) + len(points_b))


class TestRegression:
    def test_small_example(self):
        series = PairedSeries.of([1, 3], [2, 5])
        assert mae(series) == pytest.approx(1.5)
        assert rmse(series) == pytest.approx(math.sqrt(2.5))

    def test_perfect(self):
        series = PairedSeries.of([1, 2, 3], [1, 2, 3])
        assert mae(series) == 0.0
        assert rmse(series) == 0.0
        assert pearson_r(series) == pytest.approx(1.0)

    def test_match_direct_formulas(self, rng):
        for _ in range(1000):
            series = random_series(rng, int(rng.integers(2, 50)))
            p, r = series.predictions, series.references
            assert mae(series) == pytest.approx(np.mean(np.abs(p - r)), abs=1e-9)
            assert rmse(series) == pytest.approx(math.sqrt(np.mean((p - r) ** 2)), abs=1e-9)
            assert rmse(series) >= mae(series) - 1e-12
            dp, dr = p - p.mean(), r - r.mean()
            expected = np.sum(dp * dr) / math.sqrt(np.sum(dp ** 2) * np.sum(dr ** 2))
            assert pearson_r(series) == pytest.approx(expected, abs=1e-9)

    def test_constant_predictions(self):
        with pytest.raises(ZeroVarianceError):
            pearson_r(PairedSeries.of([3, 3, 3], [1, 2, 3]))

    def test_invalid_series(self):
        with pytest.raises(EmptySeriesError):
            PairedSeries.of([], [])
        with pytest.raises(LengthMismatchError):
            PairedSeries.of([1, 2], [1])


class TestBlandAltman:
    def test_identical(self):
        assert bland_altman(PairedSeries.of([1, 2, 3], [1, 2, 3])).as_tuple() == (0.0, 0.0, 0.0, 0.0)

    def test_constant_offset(self):
        stats = bland_altman(PairedSeries.of([2, 3, 4], [1, 2, 3]))
        assert stats.as_tuple() == pytest.approx((1.0, 0.0, 1.0, 1.0))

    def test_single_pair(self):
        assert bland_altman(PairedSeries.of([4], [2])).as_tuple() == (2.0, 0.0, 2.0, 2.0)

    def test_random_series(self, rng):
        for _ in range(1000):
            series = random_series(rng, int(rng.integers(2, 60)))
            d = series.predictions - series.references
            mean = float(np.sum(d) / d.size)
            sd = math.sqrt(float(np.sum((d - mean) ** 2)) / (d.size - 1))
            stats = bland_altman(series)
            assert stats.mean_diff == pytest.approx(mean, abs=1e-9)
            assert stats.sd_diff == pytest.approx(sd, abs=1e-9)
            assert stats.loa_low == pytest.approx(mean - 1.96 * sd, abs=1e-9)
            assert stats.loa_high == pytest.approx(mean + 1.96 * sd, abs=1e-9)


class TestScatter:
    def test_rows_and_fit(self, tmp_path):
        refs = np.array([1.0, 2.0, 3.0, 4.0])
        series = PairedSeries.of(2.0 * refs + 0.5, refs)
        path = tmp_path / 'scatter.csv'
        fit = scatter_export(series, str(path))
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(0.5)

        frame = pd.read_csv(path)
        assert list(frame.columns) == SCATTER_COLUMNS
        assert len(frame) == 5
        assert (frame['kind'] == 'data').sum() == 4
        assert frame.iloc[-1]['kind'] == 'fit'
        assert frame.iloc[-1]['degenerate'] == 0

    def test_degenerate_fit(self, tmp_path):
        series = PairedSeries.of([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
        assert linear_fit(series).degenerate
        scatter_export(series, str(tmp_path / 'scatter.csv'))
        frame = pd.read_csv(tmp_path / 'scatter.csv')
        assert frame.iloc[-1]['degenerate'] == 1


def test_rater_range_coverage():
    aggregates = {
        ('e1', 's0'): RatingAggregate('e1', 's0', 3.0, 2, 4, 3),
        ('e2', 's0'): RatingAggregate('e2', 's0', 5.0, 5, 5, 3),
    }
    assert rater_range_coverage({('e1', 's0'): 3.9, ('e2', 's0'): 4.0}, aggregates) == 0.5


class TestDice:
    def test_examples(self):
        a = np.zeros((4, 4), dtype=bool)
        a[0, :] = True
        b = np.zeros((4, 4), dtype=bool)
        b[0, 2:] = True
        b[1, :2] = True
        assert dice(a, a) == 1.0
        assert dice(a, ~a) == 0.0
        assert dice(a, b) == 0.5
        assert dice(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0

    def test_symmetric_and_matches_formula(self, rng):
        for _ in range(1000):
            shape = tuple(int(n) for n in rng.integers(2, 17, size=3))
            a = rng.random(shape) < 0.3
            b = rng.random(shape) < 0.3
            expected = 2.0 * np.sum(a & b) / (np.sum(a) + np.sum(b)) if (a.any() or b.any()) else 1.0
            assert dice(a, b) == pytest.approx(expected, abs=1e-9)
            assert dice(a, b) == dice(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dice(np.zeros((2, 2)), np.zeros((3, 3)))

    def test_region_dice(self):
        gt = np.zeros((6, 6, 6), dtype=np.int16)
        gt[1:5, 1:5, 1:5] = 2
        gt[2:4, 2:4, 2:4] = 4
        candidate = gt.copy()
        candidate[candidate == 4] = 1
        scores = region_dice(TissueSeg(gt), TissueSeg(candidate))
        assert scores['wt'] == 1.0
        assert scores['tc'] == 1.0
        assert scores['et'] == 0.0


def cube(shape, start, size):
    mask = np.zeros(shape, dtype=bool)
    mask[tuple(slice(s, s + size) for s in start)] = True
    return mask


class TestSurfaceDice:
    def test_identical(self):
        a = cube((10, 10, 10), (2, 2, 2), 4)
        for tolerance in (0.0, 0.5, 3.0):
            assert surface_dice(a, a, (1, 1, 1), tolerance) == 1.0

    def test_offset_cubes_match_pairwise_oracle(self):
        a = cube((12, 12, 12), (2, 2, 2), 5)
        b = cube((12, 12, 12), (3, 4, 2), 5)
        for spacing in ((1.0, 1.0, 1.0), (1.0, 0.5, 2.0)):
            for tolerance in (0.0, 0.7, 1.3, 2.2):
                expected = brute_force_surface_dice(a, b, spacing, tolerance)
                assert surface_dice(a, b, spacing, tolerance) == pytest.approx(expected, abs=1e-9)

    def test_random_masks_match_oracle(self, rng):
        for _ in range(20):
            shape = tuple(int(n) for n in rng.integers(4, 9, size=3))
            a = rng.random(shape) < 0.4
            b = rng.random(shape) < 0.4
            spacing = tuple(float(s) for s in rng.choice([0.5, 1.0, 1.25], size=3))
            tolerance = float(rng.choice([0.3, 1.1, 1.7]))
            if not surface_voxels(a).any() or not surface_voxels(b).any():
                continue
            expected = brute_force_surface_dice(a, b, spacing, tolerance)
            assert surface_dice(a, b, spacing, tolerance) == pytest.approx(expected, abs=1e-9)
            assert surface_dice(a, b, spacing, tolerance) == pytest.approx(surface_dice(b, a, spacing, tolerance))

    def test_saturates_beyond_diagonal(self):
        a = cube((8, 8, 8), (0, 0, 0), 2)
        b = cube((8, 8, 8), (6, 6, 6), 2)
        assert surface_dice(a, b, (1, 1, 1), 20.0) == 1.0

    def test_empty_masks(self):
        empty = np.zeros((5, 5, 5), dtype=bool)
        assert surface_dice(empty, empty, (1, 1, 1)) == 1.0
        assert surface_dice(empty, cube((5, 5, 5), (1, 1, 1), 2), (1, 1, 1)) == 0.0

    def test_errors(self):
        a = cube((5, 5, 5), (1, 1, 1), 2)
        with pytest.raises(NegativeToleranceError):
            surface_dice(a, a, (1, 1, 1), -1.0)
        with pytest.raises(ShapeMismatchError):
            surface_dice(a, a, (1, 1), 1.0)
        with pytest.raises(ShapeMismatchError):
            surface_dice(a, np.zeros((5, 5, 4), dtype=bool), (1, 1, 1), 1.0)
