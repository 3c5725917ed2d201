#!/usr/bin/env python3

import os
import shutil
import tempfile
from typing import Any, Dict

from tqdm import tqdm

from .base_controller import BaseController
from ..services.dataset_service import write_synth_exam
from ..services.exceptions import OutputError
from ..services.logger import Logger
from ..services.ratings_service import write_ratings
from ..services.report_service import write_csv
from ..services.synth_service import generate_dataset, proxy_rating_records

log = Logger('controller.synth')


RATINGS_FILENAME = 'ratings.csv'
CANDIDATES_FILENAME = 'candidates.csv'
CANDIDATE_COLUMNS = ['exam_id', 'seg_id', 'severity', 'proxy_stars']


class SynthController(BaseController):
    """
    Write a phantom dataset: one directory per exam, a proxy-ratings CSV and
    a candidates CSV recording each segmentation's degradation severity.

    Everything is generated in a staging directory inside the dataset root
    and moved into place only once complete.
    """

    command = 'synth'

    @property
    def dataset_root(self) -> str:
        return self.config.paths.data_root or self.out_dir

    def _execute(self) -> Dict[str, Any]:
        root = self.dataset_root
        synth = self.config.synth
        try:
            os.makedirs(root, exist_ok=True)
            staging = tempfile.mkdtemp(prefix='.synth-', dir=root)
        except OSError as e:
            raise OutputError(f"Cannot write synthetic dataset to {root}: {e}") from e

        try:
            records, rows, exam_ids = [], [], []
            cases = generate_dataset(synth)
            for case in tqdm(cases, total=synth.n_exams, desc="Generating", unit="exam", disable=not self.progress):
                write_synth_exam(case, staging)
                exam_ids.append(case.exam_id)
                for candidate in case.candidates:
                    records.extend(proxy_rating_records(case.exam_id, candidate.seg_id, candidate.stars, synth.raters))
                    rows.append({
                        'exam_id': case.exam_id,
                        'seg_id': candidate.seg_id,
                        'severity': candidate.severity,
                        'proxy_stars': candidate.stars,
                    })
            write_ratings(records, os.path.join(staging, RATINGS_FILENAME))
            write_csv(os.path.join(staging, CANDIDATES_FILENAME), rows, columns=CANDIDATE_COLUMNS)
            self._publish(staging, root)
        except OSError as e:
            raise OutputError(f"Cannot write synthetic dataset to {root}: {e}") from e
        finally:
            shutil.rmtree(staging, ignore_errors=True)

        log.log_info(f"Wrote {len(exam_ids)} phantom exams with {len(rows)} candidate segmentations to {root}")
        return {
            'n_exams': len(exam_ids),
            'n_segmentations': len(rows),
            'n_ratings': len(records),
        }

    @staticmethod
    def _publish(staging: str, root: str):
        for name in sorted(os.listdir(staging)):
            target = os.path.join(root, name)
            if os.path.isdir(target) and not os.path.islink(target):
                shutil.rmtree(target)
            elif os.path.lexists(target):
                os.remove(target)
            os.replace(os.path.join(staging, name), target)
