#!/usr/bin/env python3

"""
Network Service - Densely connected regression networks and the hyperparameter grid
"""

import copy
import dataclasses
import itertools
from typing import Any, List, Mapping, Optional, Sequence, Union

import numpy as np
import torch
from torch import nn
from torchvision.models import DenseNet

from .exceptions import InvalidConfigError, InvalidSelectionError
from .logger import Logger
from .models.run_models import SweepSelection
from .models.train_models import Architecture, OptimizerType, TrainConfig
from .models.volume_models import LabelEncoding, Normalization

log = Logger('network')


GRID_AXES = {
    'arch': Architecture,
    'optimizer': OptimizerType,
    'normalization': Normalization,
    'encoding': LabelEncoding,
}


class DenseRegressor(nn.Module):
    """
    DenseNet backbone whose stem accepts the slice-stack channels and whose
    head is a single unbounded linear output.
    """

    def __init__(self, arch: Architecture, in_channels: int):
        super().__init__()
        plan = arch.layer_plan
        self.arch = arch
        self.in_channels = in_channels
        self.backbone = DenseNet(
            growth_rate=plan['growth_rate'],
            block_config=plan['block_config'],
            num_init_features=plan['num_init_features'],
            bn_size=plan['bn_size'],
            drop_rate=0.0,
            num_classes=1,
        )
        stem = nn.Conv2d(in_channels, plan['num_init_features'], kernel_size=7, stride=2, padding=3, bias=False)
        nn.init.kaiming_normal_(stem.weight)
        self.backbone.features.conv0 = stem

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.backbone(x).squeeze(-1)


def seed_everything(seed: int):
    """Seed torch and make cuDNN pick deterministic kernels"""
    torch.manual_seed(seed)
    torch.backends.cudnn.deterministic = True
    torch.backends.cudnn.benchmark = False


def select_device(prefer: Optional[str] = None) -> torch.device:
    if prefer:
        return torch.device(prefer)
    return torch.device('cuda' if torch.cuda.is_available() else 'cpu')


def build_model(config: TrainConfig) -> DenseRegressor:
    """
    Create an untrained regressor for `config`; weights are initialized from config.seed.

    Raises:
        InvalidConfigError: config is not a TrainConfig
    """
    if not isinstance(config, TrainConfig):
        raise InvalidConfigError(f"build_model expects a TrainConfig, got {type(config).__name__}")
    # seeded init on a forked generator; global torch RNG state is left alone
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        model = DenseRegressor(config.arch, config.in_channels)
    log.log_debug(
        f"Built {config.arch} with {config.in_channels} input channels, {count_parameters(model)} parameters"
    )
    return model


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def _axis_values(axis: str, chosen: Sequence[Any]) -> List[Any]:
    enum_cls = GRID_AXES[axis]
    if isinstance(chosen, (str, enum_cls)):
        chosen = [chosen]
    values = []
    for value in chosen:
        try:
            parsed = enum_cls.parse(value)
        except InvalidConfigError as e:
            raise InvalidSelectionError(f"Invalid {axis} value in selection: {value!r}") from e
        if parsed not in values:
            values.append(parsed)
    if not values:
        raise InvalidSelectionError(f"Selection for {axis} is empty")
    return values


def hyperparameter_grid(selection: Union[SweepSelection, Mapping[str, Sequence[Any]], None] = None,
                        base: Optional[TrainConfig] = None) -> List[TrainConfig]:
    """
    Cartesian product of the selected values on the arch, optimizer,
    normalization and encoding axes.

    Axes missing from a mapping keep the value of `base`. Ordering follows
    the axes in that order and the values in the order given.

    Raises:
        InvalidSelectionError: unknown axis, unknown value or empty axis
    """
    base = base or TrainConfig()
    if selection is None:
        selection = SweepSelection()
    if isinstance(selection, SweepSelection):
        selection = selection.to_dict()

    unknown = sorted(set(selection) - set(GRID_AXES))
    if unknown:
        raise InvalidSelectionError(f"Unknown grid axes: {', '.join(unknown)}")

    axes = []
    for axis in GRID_AXES:
        chosen = selection.get(axis)
        axes.append(_axis_values(axis, chosen) if chosen is not None else [getattr(base, axis)])

    configs = []
    for arch, optimizer, normalization, encoding in itertools.product(*axes):
        try:
            configs.append(dataclasses.replace(
                base, arch=arch, optimizer=optimizer, normalization=normalization, encoding=encoding
            ))
        except InvalidConfigError as e:
            raise InvalidSelectionError(f"Grid point {arch}/{optimizer}/{normalization}/{encoding}: {e}") from e
    return configs


def gradient_check(model: nn.Module, inputs: torch.Tensor, targets: torch.Tensor,
                   n_params: int = 100, step: float = 1e-5, seed: int = 0,
                   floor: float = 1e-3) -> float:
    """
    Compare autograd gradients of the MSE objective with central finite
    differences on randomly chosen parameter entries.

    Runs on a float64 copy in eval mode; the passed model is not modified.
    Entries whose gradient is negligible next to the largest sampled gradient
    are compared against floor * that largest gradient instead of themselves.

    Returns:
        Largest relative error |analytic - numeric| / max(|analytic|, |numeric|, floor * max|analytic|)
    """
    double_model = copy.deepcopy(model).double().eval()
    x = inputs.detach().double()
    y = targets.detach().double()
    loss_fn = nn.MSELoss()

    def objective() -> torch.Tensor:
        return loss_fn(double_model(x), y)

    double_model.zero_grad()
    objective().backward()
    params = [p for p in double_model.parameters() if p.requires_grad]
    sizes = np.array([p.numel() for p in params])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    rng = np.random.default_rng(seed)
    chosen = rng.choice(int(offsets[-1]), size=min(n_params, int(offsets[-1])), replace=False)

    entries = []
    for flat in chosen:
        which = int(np.searchsorted(offsets, flat, side='right') - 1)
        entries.append((params[which], int(flat - offsets[which])))
    analytic_grads = [float(param.grad.view(-1)[index]) for param, index in entries]
    scale = max(max((abs(g) for g in analytic_grads), default=0.0) * floor, 1e-12)

    worst = 0.0
    with torch.no_grad():
        for (param, index), analytic in zip(entries, analytic_grads):
            view = param.view(-1)

            original = float(view[index])
            view[index] = original + step
            upper = float(objective())
            view[index] = original - step
            lower = float(objective())
            view[index] = original

            numeric = (upper - lower) / (2.0 * step)
            error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), scale)
            worst = max(worst, error)
    log.log_debug(f"Gradient check over {len(chosen)} parameters: max relative error {worst:.3e}")
    return worst


def stacks_to_tensor(channels: Sequence[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(np.stack(channels), dtype=np.float32))

