#!/usr/bin/env python3

"""
Artifact Transforms - Simulated MR acquisition artifacts on 2D slices

Ghosting and spikes act in the frequency domain through TorchIO, which
works on (C, W, H, D) volumes, so slices travel as single-plane volumes.
The bias field multiplies by a smooth positive Legendre field from MONAI,
and motion blends each MR channel with a displaced copy of itself.
"""

import numpy as np
import torch
import torchio as tio
from monai.transforms import Affine, RandBiasField

from .base_transform import BaseTransform, Params, TransformKind, pair, to_numpy


# Fraction of k-space around the center that ghosting leaves intact
GHOST_RESTORE = 0.02


def _as_volume(mr: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(mr[..., np.newaxis]))


def _as_slices(volume) -> np.ndarray:
    return to_numpy(volume)[..., 0]


class MotionTransform(BaseTransform):
    """
    (1 - w) * x + w * shift(x, d) on MR channels. When the displaced copy
    dominates (w > 0.5) the label channels follow the displacement.
    """
    name = 'motion'
    kind = TransformKind.ARTIFACT

    def sample_params(self, rng):
        cfg = self.config
        return {
            'displacement': (self.uniform(rng, cfg.motion_displacement),
                             self.uniform(rng, cfg.motion_displacement)),
            'weight': self.uniform(rng, cfg.motion_weight),
        }

    def validate(self, params: Params):
        self.require(params, ('displacement', 'weight'))
        pair(params['displacement'], 'motion displacement')
        weight = float(params['weight'])
        self.check(0.0 <= weight <= 1.0, f"weight must lie in [0, 1], got {weight}")

    def is_neutral(self, params: Params) -> bool:
        dy, dx = pair(params['displacement'], 'motion displacement')
        return float(params['weight']) == 0.0 or (dy == 0.0 and dx == 0.0)

    @staticmethod
    def moves_labels(params: Params) -> bool:
        return float(params['weight']) > 0.5

    def _transform(self, stack, params, rng):
        weight = float(params['weight'])
        shift = Affine(translate_params=pair(params['displacement'], 'motion displacement'),
                       padding_mode='zeros', image_only=True)

        def blend(mr):
            return (1.0 - weight) * mr + weight * to_numpy(shift(mr, mode='bilinear'))

        channels = self.map_mr(stack, blend)
        if self.moves_labels(params):
            n_mr = stack.mr.shape[0]
            channels[n_mr:] = to_numpy(shift(stack.labels.astype(np.float32), mode='nearest'))
        return channels


class GhostingTransform(BaseTransform):
    """Attenuate every `count`-th k-space line along one axis, keeping the center"""
    name = 'ghosting'
    kind = TransformKind.ARTIFACT

    def sample_params(self, rng):
        cfg = self.config
        low, high = cfg.ghosting_count
        return {
            'count': int(rng.integers(int(round(low)), int(round(high)) + 1)),
            'intensity': self.uniform(rng, cfg.ghosting_intensity),
            'axis': int(rng.integers(0, 2)),
        }

    def validate(self, params: Params):
        self.require(params, ('count', 'intensity', 'axis'))
        self.check(int(params['count']) >= 1, f"count must be >= 1, got {params['count']}")
        intensity = float(params['intensity'])
        self.check(0.0 <= intensity <= 1.0, f"intensity must lie in [0, 1], got {intensity}")
        self.check(int(params['axis']) in (0, 1), f"axis must be 0 or 1, got {params['axis']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['intensity']) == 0.0

    def _transform(self, stack, params, rng):
        ghosting = tio.Ghosting(
            num_ghosts=int(params['count']),
            axis=int(params['axis']),
            intensity=float(params['intensity']),
            restore=GHOST_RESTORE,
        )
        return self.map_mr(stack, lambda mr: _as_slices(ghosting(_as_volume(mr))))


class SpikeTransform(BaseTransform):
    """Add one bright k-space bin, scaled to the spectrum maximum"""
    name = 'spikes'
    kind = TransformKind.ARTIFACT

    def sample_params(self, rng):
        return {
            'intensity': self.uniform(rng, self.config.spike_intensity),
            'position': (float(rng.random()), float(rng.random())),
        }

    def validate(self, params: Params):
        self.require(params, ('intensity', 'position'))
        self.check(float(params['intensity']) >= 0, f"intensity must be non-negative, got {params['intensity']}")
        py, px = pair(params['position'], 'spike position')
        self.check(0.0 <= py < 1.0 and 0.0 <= px < 1.0, f"position must lie in [0, 1), got {params['position']}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['intensity']) == 0.0

    def _transform(self, stack, params, rng):
        py, px = pair(params['position'], 'spike position')
        spike = tio.Spike(spikes_positions=np.array([[py, px, 0.0]]), intensity=float(params['intensity']))
        return self.map_mr(stack, lambda mr: _as_slices(spike(_as_volume(mr))))


class BiasFieldTransform(BaseTransform):
    """
    Multiply by exp of a Legendre polynomial of total degree `order` over
    [-1, 1]^2, coefficients uniform in [-magnitude, magnitude]. The field
    is positive and smooth, and one field is shared by all MR channels.
    """
    name = 'bias_field'
    kind = TransformKind.ARTIFACT

    def sample_params(self, rng):
        return {'order': self.config.bias_order, 'magnitude': self.uniform(rng, self.config.bias_magnitude)}

    def validate(self, params: Params):
        self.require(params, ('order', 'magnitude'))
        order = int(params['order'])
        self.check(order >= 1, f"order must be >= 1, got {order}")
        magnitude = float(params['magnitude'])
        self.check(bool(np.isfinite(magnitude)) and magnitude >= 0, f"magnitude must be finite and >= 0, got {magnitude}")

    def is_neutral(self, params: Params) -> bool:
        return float(params['magnitude']) == 0.0

    def _transform(self, stack, params, rng):
        magnitude = float(params['magnitude'])
        bias = self.seeded(RandBiasField(degree=int(params['order']), coeff_range=(-magnitude, magnitude), prob=1.0), rng)
        return self.map_mr(stack, bias)
