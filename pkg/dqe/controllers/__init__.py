#!/usr/bin/env python3

from .base_controller import BaseController
from .synth_controller import SynthController
from .train_controller import TrainController
from .infer_controller import InferController
from .eval_controller import EvalController
from .curate_controller import CurateController
from .sweep_controller import SweepController

CONTROLLERS = {
    'synth': SynthController,
    'train': TrainController,
    'infer': InferController,
    'eval': EvalController,
    'curate': CurateController,
    'sweep': SweepController,
}

__all__ = [
    'BaseController', 'SynthController', 'TrainController', 'InferController',
    'EvalController', 'CurateController', 'SweepController', 'CONTROLLERS'
]
