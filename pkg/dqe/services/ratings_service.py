#!/usr/bin/env python3

"""
Ratings Service - Ratings CSV I/O, per-segmentation aggregation and exam-level splits
"""

import math
import os
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import EmptyGroupError, InputNotFoundError, InvalidFractionError, RatingFormatError
from .logger import Logger
from .report_service import write_csv
from .models.rating_models import RatingAggregate, RatingKey, RatingRecord, RatingSet

log = Logger('ratings')


RATINGS_COLUMNS = ['exam_id', 'seg_id', 'view', 'rater_id', 'stars']


def read_ratings(path: str) -> RatingSet:
    """
    Read a ratings CSV with header exam_id,seg_id,view,rater_id,stars.

    An empty view means the rating was given on the axial slice.

    Raises:
        InputNotFoundError: path does not exist
        RatingFormatError: header or a row is malformed
    """
    if not os.path.isfile(path):
        raise InputNotFoundError(f"Ratings CSV not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise RatingFormatError(f"Cannot parse ratings CSV {path}: {e}") from e

    missing = [c for c in RATINGS_COLUMNS if c not in frame.columns]
    if missing:
        raise RatingFormatError(f"Ratings CSV {path} lacks columns {missing}")

    records = []
    for line, row in enumerate(frame[RATINGS_COLUMNS].itertuples(index=False), start=2):
        try:
            stars = int(row.stars.strip())
        except ValueError as e:
            raise RatingFormatError(f"{path}:{line}: stars '{row.stars}' is not an integer") from e
        try:
            records.append(RatingRecord(
                exam_id=row.exam_id.strip(),
                seg_id=row.seg_id.strip(),
                view=row.view,
                rater_id=row.rater_id.strip(),
                stars=stars,
            ))
        except RatingFormatError as e:
            raise RatingFormatError(f"{path}:{line}: {e}") from e

    log.log_info(f"Read {len(records)} ratings for {len({r.key for r in records})} segmentations from {path}")
    return RatingSet(records)


def ratings_frame(records: Iterable[RatingRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in records], columns=RATINGS_COLUMNS)


def write_ratings(records: Iterable[RatingRecord], path: str):
    write_csv(path, ratings_frame(records), columns=RATINGS_COLUMNS)


def aggregate(records: Iterable[RatingRecord],
              keys: Optional[Sequence[RatingKey]] = None) -> Dict[RatingKey, RatingAggregate]:
    """
    Pool all views and raters of each (exam_id, seg_id).

    Args:
        records: rating records
        keys: keys that must be present; defaults to every key seen

    Raises:
        EmptyGroupError: a requested key has no records, or there are no records at all
    """
    groups: Dict[RatingKey, List[int]] = defaultdict(list)
    for record in records:
        groups[record.key].append(record.stars)

    wanted = list(keys) if keys is not None else sorted(groups)
    if not wanted:
        raise EmptyGroupError("No rating records to aggregate")

    result = {}
    for key in wanted:
        stars = groups.get(key)
        if not stars:
            raise EmptyGroupError(f"No ratings for exam {key[0]} segmentation {key[1]}")
        result[key] = RatingAggregate(
            exam_id=key[0],
            seg_id=key[1],
            mean_stars=float(np.mean(stars)),
            min_stars=int(min(stars)),
            max_stars=int(max(stars)),
            count=len(stars),
        )
    return result


def split_dataset(exam_ids: Iterable[str], train_fraction: float, seed: int) -> Tuple[List[str], List[str]]:
    """
    Randomly split exams into train and test sides.

    The train side holds round(fraction * n) exams (halves round up); splitting
    by exam keeps every segmentation of an exam on one side.

    Raises:
        InvalidFractionError: fraction outside (0, 1)
    """
    try:
        fraction = float(train_fraction)
    except (TypeError, ValueError) as e:
        raise InvalidFractionError(f"Train fraction must be a number, got {train_fraction!r}") from e
    if not 0.0 < fraction < 1.0 or math.isnan(fraction):
        raise InvalidFractionError(f"Train fraction must lie in (0, 1), got {train_fraction}")

    unique = sorted(set(exam_ids))
    n_train = int(math.floor(fraction * len(unique) + 0.5))
    order = np.random.default_rng(seed).permutation(len(unique))
    train = sorted(unique[i] for i in order[:n_train])
    test = sorted(unique[i] for i in order[n_train:])
    log.log_debug(f"Split {len(unique)} exams into {len(train)} train / {len(test)} test (seed {seed})")
    return train, test
