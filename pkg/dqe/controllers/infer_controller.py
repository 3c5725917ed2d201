#!/usr/bin/env python3

from typing import Any, Dict

from .base_controller import BaseController
from .train_controller import predict_keys
from ..services.dataset_service import discover_candidates
from ..services.evaluation_service import write_predictions
from ..services.exceptions import EmptyInputError
from ..services.logger import Logger

log = Logger('controller.infer')


PREDICTIONS_FILENAME = 'predictions.csv'


class InferController(BaseController):
    """Predict per-view and mean stars for every candidate segmentation under the data root"""

    command = 'infer'

    def _execute(self) -> Dict[str, Any]:
        estimator = self.load_estimator()
        keys = [c.key for c in discover_candidates(self.config.paths.data_root)]
        if not keys:
            raise EmptyInputError(f"No candidate segmentations under {self.config.paths.data_root}")

        estimates = predict_keys(estimator, self.config.paths.data_root, keys, self.progress)
        path = self.out_path(PREDICTIONS_FILENAME)
        write_predictions(estimates, path)
        log.log_info(f"Wrote {len(estimates)} predictions to {path}")
        return {'n': len(estimates)}
