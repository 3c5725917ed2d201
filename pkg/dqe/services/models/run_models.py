#!/usr/bin/env python3

"""
Run Models - Top-level run configuration and the run-ledger record
"""

from dataclasses import dataclass, field, fields
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from .rating_models import MAX_STARS, MIN_STARS
from .synth_models import SynthConfig
from .train_models import Architecture, OptimizerType, TrainConfig
from .volume_models import LabelEncoding, Normalization
from ..exceptions import InvalidConfigError


DEFAULT_TOLERANCE_MM = 1.0


class EvalMode(Enum):
    RATINGS = "ratings"
    SEG = "seg"


class RunStatus(Enum):
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


@dataclass
class PathsConfig:
    """Filesystem locations a command reads from or writes to"""
    data_root: Optional[str] = None
    ratings_csv: Optional[str] = None
    checkpoint: Optional[str] = None
    predictions_csv: Optional[str] = None
    out_dir: str = "dqe_out"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PathsConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown paths keys: {', '.join(unknown)}")
        return cls(**{k: (str(v) if v is not None else None) for k, v in data.items()})

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class SweepSelection:
    """Values to combine along each hyperparameter axis"""
    arch: List[str] = field(default_factory=lambda: [a.value for a in Architecture.sweep_grid()])
    optimizer: List[str] = field(default_factory=lambda: [o.value for o in OptimizerType])
    normalization: List[str] = field(default_factory=lambda: [n.value for n in Normalization])
    encoding: List[str] = field(default_factory=lambda: [e.value for e in LabelEncoding])

    AXES = ('arch', 'optimizer', 'normalization', 'encoding')

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepSelection':
        unknown = sorted(set(data) - set(cls.AXES))
        if unknown:
            raise InvalidConfigError(f"Unknown sweep keys: {', '.join(unknown)}")
        values = {}
        for axis, chosen in data.items():
            if isinstance(chosen, str):
                chosen = [chosen]
            values[axis] = [str(v) for v in chosen]
        return cls(**values)

    def to_dict(self) -> Dict[str, List[str]]:
        return {axis: list(getattr(self, axis)) for axis in self.AXES}


@dataclass
class RunConfig:
    """Everything one CLI invocation needs, loaded from JSON and overridden by flags"""
    train: TrainConfig = field(default_factory=TrainConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    sweep: SweepSelection = field(default_factory=SweepSelection)
    threshold: Optional[float] = None
    tolerance_mm: float = DEFAULT_TOLERANCE_MM
    eval_mode: EvalMode = EvalMode.RATINGS
    train_fraction: float = 0.8
    seed: int = 0
    plot: bool = False
    log_every: int = 10

    def __post_init__(self):
        if isinstance(self.eval_mode, str):
            try:
                self.eval_mode = EvalMode(self.eval_mode)
            except ValueError:
                raise InvalidConfigError(f"eval_mode must be 'ratings' or 'seg', got '{self.eval_mode}'")
        if self.threshold is not None:
            if not MIN_STARS <= float(self.threshold) <= MAX_STARS:
                raise InvalidConfigError(f"threshold must lie in [{MIN_STARS}, {MAX_STARS}], got {self.threshold}")
            self.threshold = float(self.threshold)
        if float(self.tolerance_mm) < 0:
            raise InvalidConfigError(f"tolerance_mm must be >= 0, got {self.tolerance_mm}")
        self.tolerance_mm = float(self.tolerance_mm)
        if not 0.0 < float(self.train_fraction) < 1.0:
            raise InvalidConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not isinstance(self.log_every, int) or self.log_every < 1:
            raise InvalidConfigError(f"log_every must be >= 1, got {self.log_every}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown config keys: {', '.join(unknown)}")
        values = dict(data)
        nested = {
            'train': TrainConfig,
            'paths': PathsConfig,
            'synth': SynthConfig,
            'sweep': SweepSelection,
        }
        for key, model in nested.items():
            if key in values:
                if not isinstance(values[key], dict):
                    raise InvalidConfigError(f"Config section '{key}' must be an object")
                values[key] = model.from_dict(values[key])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'train': self.train.to_dict(),
            'paths': self.paths.to_dict(),
            'synth': self.synth.to_dict(),
            'sweep': self.sweep.to_dict(),
            'threshold': self.threshold,
            'tolerance_mm': self.tolerance_mm,
            'eval_mode': self.eval_mode.value,
            'train_fraction': self.train_fraction,
            'seed': self.seed,
            'plot': self.plot,
            'log_every': self.log_every,
        }


@dataclass
class RunRecord:
    """One CLI invocation as stored in the run ledger"""
    command: str
    config: Dict[str, Any]
    seed: int
    status: RunStatus = RunStatus.RUNNING
    id: Optional[int] = None
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None
    metrics: Dict[str, float] = field(default_factory=dict)
    message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'command': self.command,
            'config': self.config,
            'seed': self.seed,
            'status': self.status.value,
            'started_at': self.started_at.isoformat() if self.started_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
            'metrics': dict(self.metrics),
            'message': self.message,
        }
