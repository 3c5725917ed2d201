#!/usr/bin/env python3

import math
import os
from typing import Any, Dict, List

from .base_controller import BaseController
from .train_controller import ExperimentSplit, train_and_evaluate
from ..services.logger import Logger
from ..services.network_service import hyperparameter_grid
from ..services.report_service import write_csv

log = Logger('controller.sweep')


RESULTS_FILENAME = 'sweep_results.csv'
RESULT_COLUMNS = ['arch', 'optimizer', 'normalization', 'encoding', 'mae', 'rmse', 'pearson_r', 'final_loss']


def _mae_order(row: Dict[str, Any]):
    mae = row.get('mae')
    return (mae is None or not math.isfinite(mae), mae if mae is not None else 0.0)


class SweepController(BaseController):
    """Train and evaluate every selected grid point on one shared split; tabulate by MAE"""

    command = 'sweep'
    ledgered = True

    def _execute(self) -> Dict[str, Any]:
        grid = hyperparameter_grid(self.config.sweep, base=self.config.train)
        split = ExperimentSplit.from_config(self.config)
        log.log_info(f"Sweeping {len(grid)} configurations")

        rows: List[Dict[str, Any]] = []
        for i, train_config in enumerate(grid, start=1):
            log.log_info(f"[{i}/{len(grid)}] {train_config.tag}")
            run_dir = os.path.join(self.out_dir, 'sweep', train_config.tag)
            metrics = train_and_evaluate(self.config, train_config, split, run_dir, progress=self.progress)
            rows.append({
                'arch': train_config.arch.value,
                'optimizer': train_config.optimizer.value,
                'normalization': train_config.normalization.value,
                'encoding': train_config.encoding.value,
                'mae': metrics.get('mae'),
                'rmse': metrics.get('rmse'),
                'pearson_r': metrics.get('pearson_r'),
                'final_loss': metrics.get('final_loss'),
            })

        rows.sort(key=_mae_order)
        write_csv(self.out_path(RESULTS_FILENAME), rows, columns=RESULT_COLUMNS)
        best = rows[0]
        log.log_info(
            f"Best configuration by MAE: {best['arch']}/{best['optimizer']}/{best['normalization']}/"
            f"{best['encoding']} (MAE {best['mae']})"
        )
        return {'n_configs': len(rows), 'best_mae': best['mae']}
