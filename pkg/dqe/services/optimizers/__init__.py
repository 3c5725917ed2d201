#!/usr/bin/env python3

from .ranger21 import Ranger21, centralize_gradient
from .optimizer_factory import OptimizerFactory, get_optimizer_factory

__all__ = ['Ranger21', 'centralize_gradient', 'OptimizerFactory', 'get_optimizer_factory']
