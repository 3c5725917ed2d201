import pytest

from dqe.services.exceptions import (
    EmptyGroupError, InputNotFoundError, InvalidFractionError, RatingFormatError
)
from dqe.services.models.rating_models import RatingRecord
from dqe.services.models.volume_models import Axis
from dqe.services.ratings_service import aggregate, read_ratings, split_dataset, write_ratings


def records_for(exam_id, seg_id, stars):
    views = [Axis.AXIAL, Axis.CORONAL, Axis.SAGITTAL]
    return [RatingRecord(exam_id, seg_id, views[i % 3], f"r{i}", s) for i, s in enumerate(stars)]


class TestReadWrite:
    def test_round_trip(self, tmp_path):
        records = records_for('e1', 's0', [3, 4, 5]) + records_for('e2', 's1', [6])
        path = tmp_path / 'ratings.csv'
        write_ratings(records, str(path))
        loaded = read_ratings(str(path))
        assert loaded.records == records
        assert loaded.exam_ids() == ['e1', 'e2']

    def test_empty_view_is_axial(self, tmp_path):
        path = tmp_path / 'ratings.csv'
        path.write_text("exam_id,seg_id,view,rater_id,stars\ne1,s0,,r1,4\n", encoding='utf-8')
        assert read_ratings(str(path)).records[0].view is Axis.AXIAL

    @pytest.mark.parametrize('body', [
        "exam_id,seg_id,view,rater_id\ne1,s0,axial,r1\n",
        "exam_id,seg_id,view,rater_id,stars\ne1,s0,axial,r1,7\n",
        "exam_id,seg_id,view,rater_id,stars\ne1,s0,axial,r1,3.5\n",
        "exam_id,seg_id,view,rater_id,stars\ne1,s0,oblique,r1,3\n",
    ])
    def test_malformed(self, tmp_path, body):
        path = tmp_path / 'ratings.csv'
        path.write_text(body, encoding='utf-8')
        with pytest.raises(RatingFormatError):
            read_ratings(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputNotFoundError):
            read_ratings(str(tmp_path / 'absent.csv'))


class TestAggregate:
    def test_pools_views_and_raters(self):
        result = aggregate(records_for('e1', 's0', [2, 4, 6, 4]))
        agg = result[('e1', 's0')]
        assert agg.mean_stars == pytest.approx(4.0)
        assert (agg.min_stars, agg.max_stars, agg.count) == (2, 6, 4)

    def test_missing_key(self):
        with pytest.raises(EmptyGroupError):
            aggregate(records_for('e1', 's0', [3]), keys=[('e1', 's9')])

    def test_no_records(self):
        with pytest.raises(EmptyGroupError):
            aggregate([])


class TestSplit:
    def test_seventy_five_exams(self):
        exams = [f"exam_{i:02d}" for i in range(75)]
        train, test = split_dataset(exams, 0.8, seed=0)
        assert (len(train), len(test)) == (60, 15)
        assert not set(train) & set(test)
        assert sorted(train + test) == sorted(exams)

    def test_deterministic_per_seed(self):
        exams = [f"exam_{i:02d}" for i in range(20)]
        assert split_dataset(exams, 0.5, seed=3) == split_dataset(exams, 0.5, seed=3)
        assert split_dataset(exams, 0.5, seed=3) != split_dataset(exams, 0.5, seed=4)

    def test_halves_round_up(self):
        train, test = split_dataset(['a', 'b', 'c'], 0.5, seed=0)
        assert (len(train), len(test)) == (2, 1)

    def test_duplicates_collapse(self):
        train, test = split_dataset(['a', 'a', 'b', 'b'], 0.5, seed=1)
        assert len(train) == len(test) == 1

    @pytest.mark.parametrize('fraction', [0.0, 1.0, -0.2, 'half'])
    def test_invalid_fraction(self, fraction):
        with pytest.raises(InvalidFractionError):
            split_dataset(['a', 'b'], fraction, seed=0)
