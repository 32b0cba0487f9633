from . import kernels, optim, serialize, tensor
from .kernels import ACTIVE_BACKEND, HAS_NUMBA, IMPLS
from .optim import AdamState, adam_step, clip_grad_norm, collect_params, noam_lr
from .serialize import CheckpointError, load_checkpoint, save_checkpoint
from .tensor import (
    Tape,
    Tensor,
    active_tape,
    backward,
    use_tape,
    zero_grads,
)

__all__ = [
    "ACTIVE_BACKEND",
    "HAS_NUMBA",
    "IMPLS",
    "AdamState",
    "CheckpointError",
    "Tape",
    "Tensor",
    "active_tape",
    "adam_step",
    "backward",
    "clip_grad_norm",
    "collect_params",
    "kernels",
    "load_checkpoint",
    "noam_lr",
    "optim",
    "save_checkpoint",
    "serialize",
    "tensor",
    "use_tape",
    "zero_grads",
]
