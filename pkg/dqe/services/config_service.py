#!/usr/bin/env python3

"""
Config Service - JSON run configuration, flag overrides and path validation

Precedence is built-in defaults, then the config file, then command line flags.
"""

import json
import os
from typing import Any, Dict, Iterable, Optional

from .exceptions import InputNotFoundError, InvalidConfigError
from .logger import Logger
from .models.run_models import EvalMode, RunConfig

log = Logger('config')


NUM_WORKERS_ENV = 'DQE_NUM_WORKERS'

# Flag name -> location in the config dictionary
_OVERRIDE_PATHS = {
    'out_dir': ('paths', 'out_dir'),
    'data_root': ('paths', 'data_root'),
    'ratings_csv': ('paths', 'ratings_csv'),
    'checkpoint': ('paths', 'checkpoint'),
    'predictions_csv': ('paths', 'predictions_csv'),
    'epochs': ('train', 'epochs'),
    'batch_size': ('train', 'batch_size'),
    'normalization': ('train', 'normalization'),
    'encoding': ('train', 'encoding'),
    'threshold': ('threshold',),
    'tolerance_mm': ('tolerance_mm',),
    'eval_mode': ('eval_mode',),
    'plot': ('plot',),
    'n_exams': ('synth', 'n_exams'),
}


def get_num_workers() -> int:
    """Loader and curation parallelism from DQE_NUM_WORKERS (default 0: in-process)"""
    raw = os.environ.get(NUM_WORKERS_ENV, '').strip()
    if not raw:
        return 0
    try:
        value = int(raw)
    except ValueError:
        raise InvalidConfigError(f"{NUM_WORKERS_ENV} must be a non-negative integer, got '{raw}'")
    if value < 0:
        raise InvalidConfigError(f"{NUM_WORKERS_ENV} must be a non-negative integer, got {value}")
    return value


def load_config(path: Optional[str] = None) -> RunConfig:
    """
    Read a JSON run configuration; no path means all defaults.

    Raises:
        InputNotFoundError: path does not exist
        InvalidConfigError: malformed JSON, unknown keys or invalid values
    """
    if path is None:
        return RunConfig()
    if not os.path.isfile(path):
        raise InputNotFoundError(f"Config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InvalidConfigError(f"Config file {path} must contain a JSON object")
    try:
        config = RunConfig.from_dict(data)
    except TypeError as e:
        raise InvalidConfigError(f"Config file {path}: {e}") from e
    log.log_debug(f"Loaded config from {path}")
    return config


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Return a new RunConfig with command line values applied over `config`.

    `seed` sets the run seed together with the training and synthesis seeds.
    Overrides whose value is None are ignored.
    """
    data = config.to_dict()
    for name, value in overrides.items():
        if value is None:
            continue
        if name == 'seed':
            data['seed'] = value
            data['train']['seed'] = value
            data['synth']['seed'] = value
            continue
        if name not in _OVERRIDE_PATHS:
            raise InvalidConfigError(f"Unknown override '{name}'")
        target = data
        *parents, leaf = _OVERRIDE_PATHS[name]
        for parent in parents:
            target = target[parent]
        target[leaf] = value
    return RunConfig.from_dict(data)


def _require(value: Optional[str], key: str, command: str) -> str:
    if not value:
        raise InvalidConfigError(f"'{command}' requires {key} (set it in the config file or by flag)")
    return value


def _must_exist(path: str, what: str, directory: bool = False):
    exists = os.path.isdir(path) if directory else os.path.isfile(path)
    if not exists:
        raise InputNotFoundError(f"{what} not found: {path}")


def validate_paths(config: RunConfig, command: str):
    """
    Check every path `command` reads before any work starts.

    Raises:
        InvalidConfigError: a required path or value is not configured
        InputNotFoundError: a configured input does not exist
    """
    paths = config.paths
    checks: Iterable = ()
    if command in ('train', 'sweep'):
        checks = [
            (_require(paths.data_root, 'paths.data_root', command), 'Data root', True),
            (_require(paths.ratings_csv, 'paths.ratings_csv', command), 'Ratings CSV', False),
        ]
    elif command == 'infer':
        checks = [
            (_require(paths.checkpoint, 'paths.checkpoint', command), 'Checkpoint', False),
            (_require(paths.data_root, 'paths.data_root', command), 'Data root', True),
        ]
    elif command == 'curate':
        if config.threshold is None:
            raise InvalidConfigError("'curate' requires a threshold (--threshold or 'threshold' in the config)")
        checks = [
            (_require(paths.checkpoint, 'paths.checkpoint', command), 'Checkpoint', False),
            (_require(paths.data_root, 'paths.data_root', command), 'Data root', True),
        ]
    elif command == 'eval':
        checks = [(_require(paths.predictions_csv, 'paths.predictions_csv', command), 'Predictions CSV', False)]
        if config.eval_mode is EvalMode.RATINGS:
            checks.append((_require(paths.ratings_csv, 'paths.ratings_csv', command), 'Ratings CSV', False))
        else:
            checks.append((_require(paths.data_root, 'paths.data_root', command), 'Data root', True))
    elif command != 'synth':
        raise InvalidConfigError(f"Unknown command '{command}'")

    for path, what, directory in checks:
        _must_exist(path, what, directory)
