import pytest

from dqe.services.evaluation_service import (
    evaluate_against_ratings, evaluate_against_segmentations, join_keys, read_predictions, write_predictions
)
from dqe.services.exceptions import EmptyJoinError, EvaluationError, InputNotFoundError, KeyMismatchError
from dqe.services.models.quality_models import Decision, QualityEstimate
from dqe.services.models.rating_models import RatingAggregate


def estimate(exam_id, seg_id, stars):
    return QualityEstimate(exam_id, seg_id, stars, stars, stars)


class TestPredictionsFile:
    def test_round_trip(self, tmp_path):
        estimates = [QualityEstimate('e1', 's0', 2.0, 3.0, 4.0), estimate('e2', 's1', 5.5)]
        path = str(tmp_path / 'predictions.csv')
        write_predictions(estimates, path)
        assert read_predictions(path) == estimates
        header = (tmp_path / 'predictions.csv').read_text(encoding='utf-8').splitlines()[0]
        assert header == 'exam_id,seg_id,stars_axial,stars_coronal,stars_sagittal,stars_mean'

    def test_decision_column(self, tmp_path):
        path = tmp_path / 'report.csv'
        write_predictions([estimate('e1', 's0', 4.0)], str(path), decisions=[Decision.PASS])
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0].endswith(',decision')
        assert lines[1].endswith(',pass')

    def test_missing_column(self, tmp_path):
        path = tmp_path / 'predictions.csv'
        path.write_text('exam_id,seg_id,stars_axial\ne1,s0,3\n', encoding='utf-8')
        with pytest.raises(EvaluationError):
            read_predictions(str(path))

    def test_duplicates(self, tmp_path):
        path = str(tmp_path / 'predictions.csv')
        write_predictions([estimate('e1', 's0', 3.0), estimate('e1', 's0', 4.0)], path)
        with pytest.raises(EvaluationError):
            read_predictions(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputNotFoundError):
            read_predictions(str(tmp_path / 'absent.csv'))


class TestJoin:
    def test_extra_references_allowed(self):
        assert join_keys([('e', 'a')], [('e', 'a'), ('e', 'b')]) == [('e', 'a')]

    def test_unmatched_prediction(self):
        with pytest.raises(KeyMismatchError):
            join_keys([('e', 'a'), ('e', 'z')], [('e', 'a')])

    def test_no_overlap(self):
        with pytest.raises(EmptyJoinError):
            join_keys([('e', 'z')], [('e', 'a')])


def test_against_ratings():
    aggregates = {
        ('e1', 's0'): RatingAggregate('e1', 's0', 2.0, 1, 3, 4),
        ('e2', 's0'): RatingAggregate('e2', 's0', 4.0, 4, 5, 4),
        ('e3', 's0'): RatingAggregate('e3', 's0', 5.0, 5, 6, 4),
    }
    report = evaluate_against_ratings(
        [estimate('e1', 's0', 3.0), estimate('e2', 's0', 4.0), estimate('e3', 's0', 6.0)], aggregates
    )
    metrics = report.metrics
    assert metrics['n'] == 3
    assert metrics['mae'] == pytest.approx(2.0 / 3.0)
    assert metrics['rmse'] == pytest.approx((2.0 / 3.0) ** 0.5)
    assert metrics['mean_diff'] == pytest.approx(2.0 / 3.0)
    assert metrics['rater_range_coverage'] == pytest.approx(1.0)
    assert -1.0 <= metrics['pearson_r'] <= 1.0


def test_constant_predictions_give_no_correlation():
    aggregates = {(f"e{i}", 's0'): RatingAggregate(f"e{i}", 's0', float(i + 1), i + 1, i + 1, 1) for i in range(3)}
    report = evaluate_against_ratings([estimate(f"e{i}", 's0', 3.0) for i in range(3)], aggregates)
    assert report.metrics['pearson_r'] is None


def test_against_segmentations(synth_root):
    estimates = [estimate(f"synth_00{i}", f"s{j}", 6.0 - 2.0 * j - 0.1 * i) for i in range(3) for j in range(2)]
    report = evaluate_against_segmentations(estimates, str(synth_root), tolerance_mm=1.0)
    assert report.metrics['n'] == 6
    assert len(report.cases) == 6
    for case in report.cases:
        assert 0.0 <= case['dice'] <= 1.0
        assert 0.0 <= case['surface_dice'] <= 1.0
    assert 0.0 <= report.metrics['mean_dice'] <= 1.0
    assert {'pearson_axial_dice', 'pearson_coronal_dice', 'pearson_sagittal_dice'} <= set(report.metrics)


def test_segmentations_without_ground_truth(synth_root):
    with pytest.raises(EmptyJoinError):
        evaluate_against_segmentations([estimate('elsewhere', 's0', 3.0)], str(synth_root))
