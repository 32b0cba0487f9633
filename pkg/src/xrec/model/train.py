"""Minibatch training with warmup scheduling and early stopping."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..nn.optim import AdamState, adam_step, noam_lr
from ..nn.tensor import Tape, backward, use_tape, zero_grads
from .batching import CorpusTensors, SplitArrays
from .network import Network


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 10
    patience: int = 3
    seed: int = 0
    log_path: str | None = None


@dataclass
class TrainResult:
    history: list = field(default_factory=list)  # one dict per epoch, deterministic
    epoch_seconds: list = field(default_factory=list)  # wall time, not logged
    best_epoch: int = 0
    best_valid: float = float("inf")
    stopped_early: bool = False


def _epoch_batches(n: int, batch_size: int, rng) -> list:
    perm = rng.permutation(n)
    return [perm[i : i + batch_size] for i in range(0, n, batch_size)]


def evaluate_loss(net: Network, tensors: CorpusTensors, arrays: SplitArrays,
                  batch_size: int) -> dict:
    """Dropout-free average loss over a split, weighted by batch size."""
    totals = {"total": 0.0, "rating": 0.0, "keyphrase": 0.0, "justification": 0.0}
    n = len(arrays)
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        batch = tensors.batch_for(arrays, idx)
        _, parts = net.joint_loss(batch, train=False)
        for key, val in parts.as_dict().items():
            totals[key] += val * len(idx)
    return {k: v / max(n, 1) for k, v in totals.items()}


def train_model(net: Network, tensors: CorpusTensors, cfg: TrainConfig) -> TrainResult:
    h = net.hyper
    train_arrays = tensors.splits["train"]
    valid_arrays = tensors.splits["valid"]
    params = net.parameters()
    state = AdamState.for_params(params)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    dropout_rng = np.random.default_rng([cfg.seed, 2])
    result = TrainResult()
    log_fh = open(cfg.log_path, "a") if cfg.log_path else None
    bad_epochs = 0
    try:
        for epoch in range(1, cfg.epochs + 1):
            t0 = time.time()
            run_loss = 0.0
            seen = 0
            lr = 0.0
            for idx in _epoch_batches(len(train_arrays), h.batch_size, shuffle_rng):
                batch = tensors.batch_for(train_arrays, idx)
                tape = Tape()
                zero_grads(params)
                with use_tape(tape):
                    loss, parts = net.joint_loss(batch, train=True, rng=dropout_rng)
                if not np.isfinite(parts.total):
                    raise TrainingDiverged("diverged")
                backward(loss, tape)
                lr = noam_lr(state.step + 1, h.d_model, h.warmup, h.lr_scale)
                adam_step(params, state, lr, h.adam_beta1, h.adam_beta2, h.adam_eps)
                run_loss += parts.total * len(idx)
                seen += len(idx)
            train_loss = run_loss / max(seen, 1)
            valid = evaluate_loss(net, tensors, valid_arrays, h.batch_size)
            row = {
                "epoch": epoch,
                "train_loss": train_loss,
                "valid_loss": valid["total"],
                "valid_parts": valid,
                "lr": lr,
            }
            result.history.append(row)
            result.epoch_seconds.append(round(time.time() - t0, 3))
            if log_fh:
                log_fh.write(json.dumps(row, sort_keys=True) + "\n")
                log_fh.flush()
            if valid["total"] < result.best_valid:
                result.best_valid = valid["total"]
                result.best_epoch = epoch
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.patience:
                    result.stopped_early = True
                    break
    finally:
        if log_fh:
            log_fh.close()
    return result


def rating_mae(net: Network, tensors: CorpusTensors, arrays: SplitArrays,
               batch_size: int = 256) -> float:
    errs = []
    n = len(arrays)
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        batch = tensors.batch_for(arrays, idx)
        z = net.encode(batch.user_rows, batch.item_rows, batch.user_hist, batch.item_hist)
        pred = net.predict_rating(z).data
        errs.append(np.abs(pred - batch.labels))
    return float(np.concatenate(errs).mean()) if errs else 0.0
