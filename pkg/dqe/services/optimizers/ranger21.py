#!/usr/bin/env python3

"""
Ranger21 - AdamW core with positive-negative momentum, gradient centralization,
stable weight decay, linear warm-up and lookahead
"""

import math
from typing import Callable, Optional, Tuple

import torch
from torch.optim import Optimizer


def centralize_gradient(grad: torch.Tensor, gc_conv_only: bool = False) -> torch.Tensor:
    """Subtract the per-output-unit mean of multi-dimensional gradients"""
    dims = grad.dim()
    if dims > (3 if gc_conv_only else 1):
        grad = grad - grad.mean(dim=tuple(range(1, dims)), keepdim=True)
    return grad


def default_warmup_iterations(beta2: float, total_iterations: Optional[int]) -> int:
    """2 / (1 - beta2) iterations, capped at 22% of the run when its length is known"""
    warmup = math.ceil(2.0 / (1.0 - beta2))
    if total_iterations:
        warmup = min(warmup, max(1, int(0.22 * total_iterations)))
    return warmup


class Ranger21(Optimizer):
    """
    Ranger21 optimizer.

    Args:
        params: iterable of parameters or parameter groups
        lr: peak learning rate reached after warm-up
        betas: first and second moment decay
        eps: denominator term
        weight_decay: stable (variance normalized) weight decay factor
        use_gc: centralize gradients
        pnm_momentum: positive-negative momentum factor
        total_iterations: length of the run, shortens the default warm-up
        num_warmup_iterations: explicit warm-up length (0 disables warm-up)
        lookahead_steps: synchronize with the slow weights every k steps
        lookahead_alpha: interpolation factor toward the fast weights
    """

    def __init__(self, params, lr: float = 1e-3, betas: Tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 1e-4, use_gc: bool = True,
                 gc_conv_only: bool = False, pnm_momentum: float = 1.0,
                 total_iterations: Optional[int] = None, num_warmup_iterations: Optional[int] = None,
                 lookahead_steps: int = 5, lookahead_alpha: float = 0.5):
        if lr <= 0:
            raise ValueError(f"Invalid learning rate: {lr}")
        if not 0.0 <= betas[0] < 1.0 or not 0.0 <= betas[1] < 1.0:
            raise ValueError(f"Invalid betas: {betas}")
        if lookahead_steps < 1 or not 0.0 <= lookahead_alpha <= 1.0:
            raise ValueError(f"Invalid lookahead settings: k={lookahead_steps}, alpha={lookahead_alpha}")

        defaults = dict(lr=lr, betas=betas, eps=eps, weight_decay=weight_decay)
        super().__init__(params, defaults)

        self.use_gc = use_gc
        self.gc_conv_only = gc_conv_only
        self.pnm_momentum = pnm_momentum
        self.lookahead_steps = lookahead_steps
        self.lookahead_alpha = lookahead_alpha
        if num_warmup_iterations is None:
            num_warmup_iterations = default_warmup_iterations(betas[1], total_iterations)
        self.num_warmup_iterations = num_warmup_iterations

    def warmup_lr(self, lr: float, step: int) -> float:
        if self.num_warmup_iterations <= 0:
            return lr
        return lr * min(1.0, step / self.num_warmup_iterations)

    def _gradient(self, p: torch.Tensor) -> torch.Tensor:
        grad = p.grad
        if grad.is_sparse:
            raise RuntimeError("Ranger21 does not support sparse gradients")
        if self.use_gc:
            grad = centralize_gradient(grad, self.gc_conv_only)
        return grad

    @torch.no_grad()
    def step(self, closure: Optional[Callable] = None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()

        # phase 1: second moments and their global mean for stable weight decay
        param_size = 0
        variance_sum = 0.0
        for group in self.param_groups:
            beta2 = group['betas'][1]
            for p in group['params']:
                if p.grad is None:
                    continue
                state = self.state[p]
                if len(state) == 0:
                    state['step'] = 0
                    state['grad_ma'] = torch.zeros_like(p, memory_format=torch.preserve_format)
                    state['neg_grad_ma'] = torch.zeros_like(p, memory_format=torch.preserve_format)
                    state['variance_ma'] = torch.zeros_like(p, memory_format=torch.preserve_format)
                    state['max_variance_ma'] = torch.zeros_like(p, memory_format=torch.preserve_format)
                    state['slow_buffer'] = p.detach().clone()
                state['step'] += 1
                grad = self._gradient(p)
                state['variance_ma'].mul_(beta2).addcmul_(grad, grad, value=1 - beta2)
                bias_correction2 = 1 - beta2 ** state['step']
                variance_sum += float((state['variance_ma'] / bias_correction2).sum())
                param_size += p.numel()

        if param_size == 0:
            return loss
        variance_normalized = math.sqrt(variance_sum / param_size)
        if math.isnan(variance_normalized):
            raise RuntimeError("Ranger21 hit NaN in the variance estimate")

        noise_norm = math.sqrt((1 + self.pnm_momentum) ** 2 + self.pnm_momentum ** 2)

        # phase 2: decay, positive-negative momentum step, lookahead
        for group in self.param_groups:
            beta1, beta2 = group['betas']
            for p in group['params']:
                if p.grad is None:
                    continue
                state = self.state[p]
                step = state['step']
                lr = self.warmup_lr(group['lr'], step)

                if group['weight_decay'] and variance_normalized > 0:
                    p.mul_(1 - group['weight_decay'] * lr / variance_normalized)

                if step % 2 == 1:
                    grad_ma, neg_grad_ma = state['grad_ma'], state['neg_grad_ma']
                else:
                    grad_ma, neg_grad_ma = state['neg_grad_ma'], state['grad_ma']

                grad = self._gradient(p)
                grad_ma.mul_(beta1 ** 2).add_(grad, alpha=1 - beta1 ** 2)

                max_variance_ma = state['max_variance_ma']
                torch.max(max_variance_ma, state['variance_ma'], out=max_variance_ma)
                bias_correction1 = 1 - beta1 ** step
                bias_correction2 = 1 - beta2 ** step
                denom = (max_variance_ma.sqrt() / math.sqrt(bias_correction2)).add_(group['eps'])

                pnmomentum = grad_ma.mul(1 + self.pnm_momentum).add(neg_grad_ma, alpha=-self.pnm_momentum)
                pnmomentum.mul_(1.0 / noise_norm)
                p.addcdiv_(pnmomentum, denom, value=-lr / bias_correction1)

                if step % self.lookahead_steps == 0:
                    slow = state['slow_buffer']
                    slow.add_(p - slow, alpha=self.lookahead_alpha)
                    p.copy_(slow)

        return loss
