#!/usr/bin/env python3

"""
Train Models - Network architectures, optimizers, training configuration and checkpoints
"""

from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Tuple

from .augment_models import AugmentConfig
from .volume_models import LabelEncoding, MR_CHANNELS, Normalization, _ParsableEnum
from ..exceptions import InvalidConfigError


class Architecture(_ParsableEnum):
    """
    Densely connected regression backbones.
    DENSE_TINY is a desk-scale variant and is never part of the default grid.
    """
    DENSE121 = "dense121"
    DENSE201 = "dense201"
    DENSE_TINY = "dense_tiny"

    @classmethod
    def get_layer_plans(cls) -> Dict['Architecture', Dict[str, Any]]:
        """Growth rate, dense block depths and stem width per architecture"""
        return {
            cls.DENSE121: {'growth_rate': 32, 'block_config': (6, 12, 24, 16), 'num_init_features': 64, 'bn_size': 4},
            cls.DENSE201: {'growth_rate': 32, 'block_config': (6, 12, 48, 32), 'num_init_features': 64, 'bn_size': 4},
            cls.DENSE_TINY: {'growth_rate': 8, 'block_config': (2, 2), 'num_init_features': 16, 'bn_size': 2},
        }

    @classmethod
    def sweep_grid(cls) -> List['Architecture']:
        return [cls.DENSE121, cls.DENSE201]

    @property
    def layer_plan(self) -> Dict[str, Any]:
        return self.get_layer_plans()[self]

    @property
    def min_input_size(self) -> int:
        """Smallest side length that keeps the last feature map at least 2x2"""
        downsamplings = 2 + len(self.layer_plan['block_config']) - 1
        return 2 ** (downsamplings + 1)


class OptimizerType(_ParsableEnum):
    """Optimizers compared between training runs"""
    RANGER21 = "ranger21"
    ADAMW = "adamw"
    SGD_MOMENTUM = "sgd_momentum"

    @classmethod
    def get_display_names(cls) -> Dict['OptimizerType', str]:
        return {
            cls.RANGER21: "Ranger21",
            cls.ADAMW: "AdamW",
            cls.SGD_MOMENTUM: "SGD (momentum 0.95)",
        }

    @property
    def display_name(self) -> str:
        return self.get_display_names()[self]


DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_BATCH_SIZE = 80
DEFAULT_EPOCHS = 500
SGD_MOMENTUM = 0.95


@dataclass
class TrainConfig:
    """One point of the hyperparameter grid plus the training constants"""
    arch: Architecture = Architecture.DENSE121
    optimizer: OptimizerType = OptimizerType.RANGER21
    normalization: Normalization = Normalization.PERCENTILE
    encoding: LabelEncoding = LabelEncoding.BRATS
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    input_size: Tuple[int, int] = (128, 128)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        self.arch = Architecture.parse(self.arch)
        self.optimizer = OptimizerType.parse(self.optimizer)
        self.normalization = Normalization.parse(self.normalization)
        self.encoding = LabelEncoding.parse(self.encoding)
        if isinstance(self.augment, dict):
            self.augment = AugmentConfig.from_dict(self.augment)
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise InvalidConfigError(f"train.batch_size must be >= 1, got {self.batch_size}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise InvalidConfigError(f"train.epochs must be >= 1, got {self.epochs}")
        if not isinstance(self.learning_rate, (int, float)) or not self.learning_rate > 0:
            raise InvalidConfigError(f"train.learning_rate must be > 0, got {self.learning_rate}")
        self.learning_rate = float(self.learning_rate)
        if not isinstance(self.seed, int):
            raise InvalidConfigError(f"train.seed must be an integer, got {self.seed!r}")
        size = tuple(self.input_size)
        if len(size) != 2 or any(not isinstance(n, int) for n in size):
            raise InvalidConfigError(f"train.input_size must be two integers, got {self.input_size}")
        minimum = self.arch.min_input_size
        if min(size) < minimum:
            raise InvalidConfigError(f"train.input_size {size} is below the {minimum} px minimum of {self.arch}")
        self.input_size = size

    @property
    def in_channels(self) -> int:
        return MR_CHANNELS + self.encoding.label_channels

    @property
    def tag(self) -> str:
        """Short identifier for output directories and result tables"""
        return f"{self.arch}-{self.optimizer}-{self.normalization}-{self.encoding}"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown train keys: {', '.join(unknown)}")
        values = dict(data)
        if 'input_size' in values:
            values['input_size'] = tuple(values['input_size'])
        if 'augment' in values and isinstance(values['augment'], dict):
            values['augment'] = AugmentConfig.from_dict(values['augment'])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'arch': self.arch.value,
            'optimizer': self.optimizer.value,
            'normalization': self.normalization.value,
            'encoding': self.encoding.value,
            'learning_rate': self.learning_rate,
            'batch_size': self.batch_size,
            'epochs': self.epochs,
            'seed': self.seed,
            'input_size': list(self.input_size),
            'augment': self.augment.to_dict(),
        }


@dataclass
class Checkpoint:
    """A trained model: weights, the config that produced them and the loss history"""
    weights: Dict[str, Any]
    config: TrainConfig
    history: List[float] = field(default_factory=list)
    format_version: int = 1

    @property
    def final_loss(self) -> float:
        return self.history[-1] if self.history else float('nan')
