#!/usr/bin/env python3

"""
Optimizer Factory - Creates the optimizers compared between training runs
"""

from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional

import torch

from .ranger21 import Ranger21
from ..exceptions import InvalidConfigError
from ..models.train_models import OptimizerType, SGD_MOMENTUM


class OptimizerBuilder(ABC):
    """Builds one optimizer family"""

    @abstractmethod
    def create_optimizer(self, params: Iterable[torch.nn.Parameter], lr: float,
                         total_iterations: Optional[int] = None) -> torch.optim.Optimizer:
        pass


class Ranger21Builder(OptimizerBuilder):
    def create_optimizer(self, params, lr, total_iterations=None):
        return Ranger21(params, lr=lr, total_iterations=total_iterations)


class AdamWBuilder(OptimizerBuilder):
    def create_optimizer(self, params, lr, total_iterations=None):
        return torch.optim.AdamW(params, lr=lr)


class SGDMomentumBuilder(OptimizerBuilder):
    def create_optimizer(self, params, lr, total_iterations=None):
        return torch.optim.SGD(params, lr=lr, momentum=SGD_MOMENTUM)


class OptimizerFactory:
    """Registry of optimizer builders keyed by OptimizerType"""

    def __init__(self):
        self._builders: Dict[OptimizerType, OptimizerBuilder] = {}
        self._register_default_builders()

    def register_builder(self, optimizer_type: OptimizerType, builder: OptimizerBuilder):
        self._builders[optimizer_type] = builder

    def create_optimizer(self, optimizer_type, params: Iterable[torch.nn.Parameter], lr: float,
                         total_iterations: Optional[int] = None) -> torch.optim.Optimizer:
        """
        Args:
            optimizer_type: OptimizerType or its string value
            params: model parameters
            lr: learning rate
            total_iterations: optimizer steps in the whole run, used by warm-up schedules

        Raises:
            InvalidConfigError: unknown optimizer or invalid hyperparameters
        """
        optimizer_type = OptimizerType.parse(optimizer_type)
        if optimizer_type not in self._builders:
            raise InvalidConfigError(f"No builder registered for optimizer: {optimizer_type}")
        try:
            return self._builders[optimizer_type].create_optimizer(params, lr, total_iterations)
        except ValueError as e:
            raise InvalidConfigError(f"Failed to create {optimizer_type.display_name} optimizer: {e}") from e

    def get_supported_types(self) -> List[OptimizerType]:
        return list(self._builders.keys())

    def _register_default_builders(self):
        self.register_builder(OptimizerType.RANGER21, Ranger21Builder())
        self.register_builder(OptimizerType.ADAMW, AdamWBuilder())
        self.register_builder(OptimizerType.SGD_MOMENTUM, SGDMomentumBuilder())


# Global factory instance
_optimizer_factory = None


def get_optimizer_factory() -> OptimizerFactory:
    """Get the global optimizer factory instance"""
    global _optimizer_factory
    if _optimizer_factory is None:
        _optimizer_factory = OptimizerFactory()
    return _optimizer_factory
