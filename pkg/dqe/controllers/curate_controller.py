#!/usr/bin/env python3

from typing import Any, Dict

from .base_controller import BaseController
from ..services.config_service import get_num_workers
from ..services.dataset_service import discover_candidates
from ..services.evaluation_service import write_predictions
from ..services.inference_service import curate
from ..services.logger import Logger
from ..services.report_service import write_manifest

log = Logger('controller.curate')


REPORT_FILENAME = 'curation_report.csv'
KEPT_FILENAME = 'kept.csv'
REJECTED_FILENAME = 'rejected.csv'


class CurateController(BaseController):
    """Gate every candidate segmentation on its predicted mean stars"""

    command = 'curate'
    ledgered = True

    def _execute(self) -> Dict[str, Any]:
        estimator = self.load_estimator()
        candidates = discover_candidates(self.config.paths.data_root)
        result = curate(candidates, estimator, self.config.threshold, num_workers=get_num_workers())

        write_predictions([item.estimate for item in result.report], self.out_path(REPORT_FILENAME),
                          decisions=[item.decision for item in result.report])
        write_manifest(self.out_path(KEPT_FILENAME), result.kept_keys)
        write_manifest(self.out_path(REJECTED_FILENAME), result.rejected_keys)
        return {
            'threshold': result.threshold,
            'n': len(result.report),
            'kept': len(result.kept),
            'rejected': len(result.rejected),
        }
