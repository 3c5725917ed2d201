#!/usr/bin/env python3

"""
Training Service - MSE regression of mean star ratings from slice stacks

Runs exactly the configured number of epochs and returns the last-epoch
weights; there is no validation-based model selection.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

from .augment import apply_pipeline
from .config_service import get_num_workers
from .exceptions import EmptyDatasetError, NonFiniteLossError, TrainingError
from .logger import Logger
from .models.augment_models import ALL_TRANSFORMS
from .models.rating_models import MAX_STARS, MIN_STARS
from .models.train_models import Checkpoint, TrainConfig
from .models.volume_models import SliceStack
from .network_service import build_model, seed_everything, select_device
from .optimizers import get_optimizer_factory
from .volume_service import resize_stack

log = Logger('training')


@dataclass
class TrainingSample:
    """One slice stack and the pooled mean stars of its segmentation"""
    stack: SliceStack
    mean_stars: float
    exam_id: str = ''
    seg_id: str = ''


class SliceDataset(Dataset):
    """
    Slice stacks resized to the network resolution, augmented on access.

    The augmentation generator is derived from (seed, epoch, index) so every
    sample sees a fresh but reproducible draw each epoch, independent of
    worker scheduling.
    """

    def __init__(self, samples: Sequence[TrainingSample], config: TrainConfig, augment: bool = True):
        self.stacks = [resize_stack(s.stack, config.input_size) for s in samples]
        self.labels = np.asarray([s.mean_stars for s in samples], dtype=np.float32)
        self.config = config
        self.augment = augment and any(config.augment.probability(name) > 0 for name in ALL_TRANSFORMS)
        self.epoch = 0

    def __len__(self) -> int:
        return len(self.stacks)

    def __getitem__(self, index: int):
        stack = self.stacks[index]
        if self.augment:
            rng = np.random.default_rng([self.config.seed, self.config.augment.seed, self.epoch, index])
            stack = apply_pipeline(stack, self.config.augment, rng)
        channels = torch.from_numpy(np.ascontiguousarray(stack.channels, dtype=np.float32))
        return channels, torch.tensor(self.labels[index])


def _check_samples(samples: Sequence[TrainingSample], config: TrainConfig):
    if not samples:
        raise EmptyDatasetError("Training needs at least one sample")
    for sample in samples:
        if not MIN_STARS <= sample.mean_stars <= MAX_STARS:
            raise TrainingError(
                f"Label {sample.mean_stars} of {sample.exam_id}/{sample.seg_id} outside [{MIN_STARS}, {MAX_STARS}]"
            )
        stack = sample.stack
        if stack.encoding is not config.encoding or stack.normalization is not config.normalization:
            raise TrainingError(
                f"Sample {sample.exam_id}/{sample.seg_id} was preprocessed with {stack.encoding}/{stack.normalization}, "
                f"config expects {config.encoding}/{config.normalization}"
            )


def train(samples: Sequence[TrainingSample], config: TrainConfig,
          device: Optional[str] = None, log_every: int = 10, progress: bool = False,
          on_epoch: Optional[Callable[[int, float], None]] = None) -> Checkpoint:
    """
    Train a regressor on (slice stack, mean stars) samples.

    Args:
        samples: training samples; each view of a segmentation is its own sample
        config: architecture, optimizer, preprocessing and training constants
        device: torch device name, defaults to CUDA when available
        log_every: epochs between INFO progress lines
        progress: show a tqdm progress bar over epochs
        on_epoch: called with (epoch, mean loss) after every epoch

    Returns:
        Checkpoint holding the last-epoch weights and the per-epoch mean loss

    Raises:
        EmptyDatasetError: no samples
        NonFiniteLossError: a batch produced a NaN or Inf loss
    """
    _check_samples(samples, config)
    seed_everything(config.seed)
    torch_device = select_device(device)

    dataset = SliceDataset(samples, config)
    model = build_model(config).to(torch_device)
    generator = torch.Generator().manual_seed(config.seed)
    num_workers = get_num_workers()
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        generator=generator,
        num_workers=num_workers,
        drop_last=False,
    )
    batches_per_epoch = math.ceil(len(dataset) / config.batch_size)
    optimizer = get_optimizer_factory().create_optimizer(
        config.optimizer, model.parameters(), config.learning_rate,
        total_iterations=config.epochs * batches_per_epoch,
    )
    loss_fn = nn.MSELoss()

    log.log_info(
        f"Training {config.tag} on {len(dataset)} samples for {config.epochs} epochs "
        f"(batch {config.batch_size}, lr {config.learning_rate}, workers {num_workers}, device {torch_device})"
    )

    history: List[float] = []
    epochs = range(1, config.epochs + 1)
    for epoch in tqdm(epochs, desc="Training", unit="epoch", disable=not progress):
        dataset.epoch = epoch
        model.train()
        total, count = 0.0, 0
        for batch, (inputs, targets) in enumerate(loader):
            inputs = inputs.to(torch_device)
            targets = targets.to(torch_device)
            optimizer.zero_grad()
            loss = loss_fn(model(inputs), targets)
            if not torch.isfinite(loss):
                raise NonFiniteLossError(
                    f"Loss became {loss.item()} at epoch {epoch}, batch {batch} ({config.tag}, lr {config.learning_rate})"
                )
            loss.backward()
            optimizer.step()
            total += loss.item() * inputs.shape[0]
            count += inputs.shape[0]

        epoch_loss = total / count
        history.append(epoch_loss)
        log.log_debug(f"Epoch {epoch}/{config.epochs}: loss {epoch_loss:.6f}")
        if epoch % log_every == 0 or epoch == config.epochs:
            log.log_info(f"Epoch {epoch}/{config.epochs}: loss {epoch_loss:.6f}")
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)

    weights = {name: tensor.detach().cpu().clone() for name, tensor in model.state_dict().items()}
    return Checkpoint(weights=weights, config=config, history=history)
