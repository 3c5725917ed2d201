#!/usr/bin/env python3

"""
Report Service - Atomic CSV / JSON writers and optional plots

Every file is first written to a temporary sibling and then renamed into
place, so a failed command never leaves a half-written output behind.
Floats in CSV files carry 9 significant digits.
"""

import contextlib
import json
import math
import os
import tempfile
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import OutputError
from .logger import Logger

log = Logger('report')


FLOAT_FORMAT = '%.9g'


@contextlib.contextmanager
def atomic_path(path: str) -> Iterator[str]:
    """
    Yield a temporary path next to `path`; rename it over `path` on success.

    Raises:
        OutputError: the directory cannot be created or the rename fails
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        handle, temp_path = tempfile.mkstemp(
            prefix=f".{os.path.basename(path)}.", suffix=os.path.splitext(path)[1] or '.tmp', dir=directory
        )
        os.close(handle)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e

    try:
        yield temp_path
        os.replace(temp_path, path)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e
    finally:
        if os.path.exists(temp_path):
            os.remove(temp_path)


def write_text(path: str, text: str):
    with atomic_path(path) as temp_path:
        with open(temp_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)


def write_csv(path: str, rows: Any, columns: Optional[Sequence[str]] = None):
    """Write a DataFrame or a list of row dicts as UTF-8 CSV with a header"""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    if columns is not None:
        frame = frame.reindex(columns=list(columns))
    with atomic_path(path) as temp_path:
        frame.to_csv(temp_path, index=False, float_format=FLOAT_FORMAT, encoding='utf-8', lineterminator='\n')
    log.log_debug(f"Wrote {len(frame)} rows to {path}")


def _json_safe(value: Any) -> Any:
    """NaN and Inf are not JSON; numpy scalars become Python numbers"""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_json(data: Any) -> str:
    return json.dumps(_json_safe(data), indent=2, sort_keys=True) + '\n'


def write_json(path: str, data: Dict[str, Any]):
    write_text(path, to_json(data))


def read_json(path: str) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_manifest(path: str, keys: Iterable[Sequence[str]]):
    """List of (exam_id, seg_id) pairs"""
    write_csv(path, [{'exam_id': e, 'seg_id': s} for e, s in keys], columns=['exam_id', 'seg_id'])


# ---------------------------------------------------------------- plots

def _pyplot():
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    return plt


def _save_figure(fig, path: str):
    plt = _pyplot()
    try:
        with atomic_path(path) as temp_path:
            fig.savefig(temp_path, dpi=150, bbox_inches='tight', format='png')
    finally:
        plt.close(fig)
    log.log_info(f"Wrote plot {path}")


def plot_scatter(references: Sequence[float], predictions: Sequence[float], path: str,
                 slope: Optional[float] = None, intercept: Optional[float] = None,
                 title: str = "Predicted vs. reference stars"):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(references, predictions, alpha=0.7)
    ax.plot([1, 6], [1, 6], color='grey', linestyle=':', linewidth=1)
    if slope is not None and intercept is not None and math.isfinite(slope):
        xs = np.array([1.0, 6.0])
        ax.plot(xs, slope * xs + intercept, color='r', linewidth=1)
    ax.set_xlim(0.8, 6.2)
    ax.set_ylim(0.8, 6.2)
    ax.set_xlabel('Reference stars')
    ax.set_ylabel('Predicted stars')
    ax.set_title(title)
    ax.grid(True, linestyle='--', alpha=0.7)
    _save_figure(fig, path)


def plot_bland_altman(references: Sequence[float], predictions: Sequence[float], path: str,
                      mean_diff: float, loa_low: float, loa_high: float,
                      title: str = "Bland-Altman: predicted vs. reference stars"):
    plt = _pyplot()
    references = np.asarray(references, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    mean = (references + predictions) / 2.0
    diff = predictions - references

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.scatter(mean, diff, alpha=0.7)
    ax.axhline(mean_diff, color='k', linestyle='-', linewidth=1)
    ax.axhline(loa_high, color='r', linestyle='--', linewidth=1)
    ax.axhline(loa_low, color='r', linestyle='--', linewidth=1)
    right = float(np.max(mean))
    ax.text(right, mean_diff, f'Mean diff: {mean_diff:.2f}', horizontalalignment='right', verticalalignment='bottom')
    ax.text(right, loa_high, f'Upper LoA: {loa_high:.2f}', horizontalalignment='right', verticalalignment='bottom')
    ax.text(right, loa_low, f'Lower LoA: {loa_low:.2f}', horizontalalignment='right', verticalalignment='top')
    ax.set_xlabel('Mean of prediction and reference')
    ax.set_ylabel('Prediction - reference')
    ax.set_title(title)
    ax.grid(True, linestyle='--', alpha=0.7)
    _save_figure(fig, path)


def plot_overlap(dice: Sequence[float], stars: Sequence[float], path: str,
                 surface_dice: Optional[Sequence[float]] = None,
                 slope: Optional[float] = None, intercept: Optional[float] = None,
                 title: str = "Predicted stars vs. overlap with ground truth"):
    """Mean predicted stars against whole-tumor DSC, and surface DSC when given"""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(dice, stars, alpha=0.7, label='DSC')
    if surface_dice is not None:
        ax.scatter(surface_dice, stars, alpha=0.7, marker='x', label='Surface DSC')
    if slope is not None and intercept is not None and math.isfinite(slope):
        xs = np.array([0.0, 1.0])
        ax.plot(xs, slope * xs + intercept, color='r', linewidth=1)
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(0.8, 6.2)
    ax.set_xlabel('Overlap with ground truth')
    ax.set_ylabel('Mean predicted stars')
    ax.set_title(title)
    ax.legend(loc='lower right')
    ax.grid(True, linestyle='--', alpha=0.7)
    _save_figure(fig, path)


def plot_history(losses: List[float], path: str):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(np.arange(1, len(losses) + 1), losses)
    ax.set_xlabel('Epoch')
    ax.set_ylabel('Training MSE')
    ax.set_yscale('log')
    ax.grid(True, linestyle='--', alpha=0.7)
    _save_figure(fig, path)
