#!/usr/bin/env python3

import os
from typing import Any, Dict, Optional

from ..services.config_service import validate_paths
from ..services.exceptions import ConfigMismatchError
from ..services.inference_service import QualityEstimator
from ..services.logger import Logger
from ..services.models.run_models import RunConfig
from ..services.run_ledger_service import RunLedgerService

log = Logger('controller')


class BaseController:
    """
    One CLI command. Subclasses implement `_execute`, which returns the
    scalar metrics worth recording; `run` validates inputs first and, for
    ledgered commands, records the invocation in the run ledger.
    """

    command = ''
    ledgered = False

    def __init__(self, config: RunConfig, progress: bool = False):
        self.config = config
        self.progress = progress
        self._ledger: Optional[RunLedgerService] = None

    @property
    def out_dir(self) -> str:
        return self.config.paths.out_dir

    def out_path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    @property
    def ledger(self) -> RunLedgerService:
        if self._ledger is None:
            self._ledger = RunLedgerService(self.out_dir)
        return self._ledger

    def run(self) -> Dict[str, Any]:
        validate_paths(self.config, self.command)
        log.log_info(f"Running {self.command} (seed {self.config.seed}, output {self.out_dir})")
        if not self.ledgered:
            return self._execute()
        with self.ledger.track(self.command, self.config.to_dict(), self.config.seed) as record:
            metrics = self._execute()
            record.metrics.update({k: v for k, v in metrics.items() if isinstance(v, (int, float)) or v is None})
        return metrics

    def load_estimator(self) -> QualityEstimator:
        """
        Load the run's checkpoint and check it was trained with the
        preprocessing this run asks for in `train`.

        Raises:
            ConfigMismatchError: normalization or label encoding differs from the checkpoint's
        """
        estimator = QualityEstimator.from_checkpoint(self.config.paths.checkpoint)
        for name in ('normalization', 'encoding'):
            requested, trained = getattr(self.config.train, name), getattr(estimator.config, name)
            if requested != trained:
                raise ConfigMismatchError(
                    f"Run asks for {name} '{requested.value}', checkpoint {self.config.paths.checkpoint} "
                    f"was trained with '{trained.value}'"
                )
        return estimator

    def _execute(self) -> Dict[str, Any]:
        raise NotImplementedError
