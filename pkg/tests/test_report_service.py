import json
import math

import numpy as np
import pytest

from dqe.services.exceptions import OutputError
from dqe.services.report_service import (
    atomic_path, plot_bland_altman, plot_history, plot_overlap, plot_scatter, read_json, to_json, write_csv,
    write_json, write_manifest
)


def test_csv_columns_and_precision(tmp_path):
    path = tmp_path / 'rows.csv'
    write_csv(str(path), [{'b': 1.0 / 3.0, 'a': 'x'}], columns=['a', 'b'])
    assert path.read_text(encoding='utf-8') == 'a,b\nx,0.333333333\n'


def test_csv_missing_values_are_empty(tmp_path):
    path = tmp_path / 'rows.csv'
    write_csv(str(path), [{'a': 'x', 'b': None}, {'a': 'y', 'b': 2.5}], columns=['a', 'b'])
    assert path.read_text(encoding='utf-8').splitlines() == ['a,b', 'x,', 'y,2.5']


def test_json_non_finite_becomes_null(tmp_path):
    path = str(tmp_path / 'out' / 'report.json')
    write_json(path, {'mae': float('nan'), 'r': np.float64(0.5), 'loa': [float('inf'), 1.0]})
    assert read_json(path) == {'mae': None, 'r': 0.5, 'loa': [None, 1.0]}
    assert json.loads(to_json({'n': np.int64(3)})) == {'n': 3}


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / 'report.json'
    target.write_text('old', encoding='utf-8')
    with pytest.raises(RuntimeError):
        with atomic_path(str(target)) as temp_path:
            with open(temp_path, 'w', encoding='utf-8') as f:
                f.write('partial')
            raise RuntimeError('interrupted')
    assert target.read_text(encoding='utf-8') == 'old'
    assert sorted(p.name for p in tmp_path.iterdir()) == ['report.json']


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('', encoding='utf-8')
    with pytest.raises(OutputError):
        write_json(str(blocker / 'report.json'), {})


def test_manifest(tmp_path):
    path = tmp_path / 'kept.csv'
    write_manifest(str(path), [('e1', 's0'), ('e2', 's1')])
    assert path.read_text(encoding='utf-8') == 'exam_id,seg_id\ne1,s0\ne2,s1\n'
    write_manifest(str(path), [])
    assert path.read_text(encoding='utf-8') == 'exam_id,seg_id\n'


def test_plots_are_png(tmp_path):
    refs, preds = [1.0, 2.5, 4.0, 5.5], [1.5, 2.0, 4.5, 5.0]
    plot_scatter(refs, preds, str(tmp_path / 'scatter.png'), slope=0.9, intercept=0.3)
    plot_scatter(refs, preds, str(tmp_path / 'degenerate.png'), slope=math.nan, intercept=math.nan)
    plot_bland_altman(refs, preds, str(tmp_path / 'ba.png'), mean_diff=0.0, loa_low=-1.0, loa_high=1.0)
    plot_history([1.0, 0.5, 0.25], str(tmp_path / 'history.png'))
    plot_overlap([0.2, 0.6, 0.9], [2.0, 4.0, 5.5], str(tmp_path / 'overlap.png'),
                 surface_dice=[0.3, 0.7, 0.95], slope=4.0, intercept=1.0)
    for name in ('scatter.png', 'degenerate.png', 'ba.png', 'history.png', 'overlap.png'):
        assert (tmp_path / name).read_bytes()[:8] == b'\x89PNG\r\n\x1a\n'


def test_figure_closed_when_save_fails(tmp_path, monkeypatch):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    from matplotlib.figure import Figure

    def broken(self, *args, **kwargs):
        raise OSError('disk full')

    plt.close('all')
    monkeypatch.setattr(Figure, 'savefig', broken)
    with pytest.raises(OutputError):
        plot_history([1.0, 0.5], str(tmp_path / 'history.png'))
    assert plt.get_fignums() == []
    assert list(tmp_path.iterdir()) == []
