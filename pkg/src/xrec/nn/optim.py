"""Adam with the warmup-then-decay learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .tensor import Tensor


def noam_lr(step: int, d_model: int, warmup: int, scale: float = 1.0) -> float:
    """Inverse-sqrt schedule with linear warmup; peaks at step == warmup."""
    if step < 1:
        raise ValueError("schedule steps start at 1")
    return scale * d_model**-0.5 * min(step**-0.5, step * warmup**-1.5)


@dataclass
class AdamState:
    """First/second moment buffers, one pair per parameter, plus step count."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params: list) -> "AdamState":
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            step=0,
        )


def adam_step(
    params: list,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.98,
    eps: float = 1e-9,
):
    """One in-place Adam update. Params whose grad is unset are skipped."""
    state.step += 1
    t = state.step
    for p, m, v in zip(params, state.m, state.v):
        if p.grad is None:
            continue
        kernels.adam_update(
            p.data,
            p.grad,
            m,
            v,
            p.data.dtype.type(lr),
            p.data.dtype.type(beta1),
            p.data.dtype.type(beta2),
            p.data.dtype.type(eps),
            t,
        )


def clip_grad_norm(params: list, max_norm: float) -> float:
    """Global-norm clip; returns the pre-clip norm."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad.astype(np.float64) ** 2).sum())
    norm = total**0.5
    if norm > max_norm and norm > 0:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= p.grad.dtype.type(factor)
    return norm


def collect_params(tree) -> list:
    """Flatten a nest of dicts/lists of Tensors into a stable-ordered list."""
    out = []
    if isinstance(tree, Tensor):
        out.append(tree)
    elif isinstance(tree, dict):
        for k in tree:
            out.extend(collect_params(tree[k]))
    elif isinstance(tree, (list, tuple)):
        for item in tree:
            out.extend(collect_params(item))
    return out
