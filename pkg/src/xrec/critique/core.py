"""Gradient-based latent editing against a critiqued keyphrase target.

The update walks the latent down the keyphrase-head BCE toward the
critiqued bit vector with normalized steps of decaying length: the step
at iteration t (1-based) has norm exactly decay^(t-1). Iteration stops
once the mean absolute difference between head probabilities and target
bits drops to the threshold, the step budget runs out, or the gradient
vanishes. Model parameters are never touched; only the latent moves.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ..nn.tensor import Tape, Tensor, backward, use_tape
from ..nn.tensor import bce_with_logits, scale, sigmoid

VANISH_EPS = 1e-12


@contextmanager
def _frozen_params(net):
    """Drop requires_grad on model params so only the latent is on tape."""
    params = net.parameters()
    saved = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad = False
    try:
        yield
    finally:
        for p, flag in zip(params, saved):
            p.requires_grad = flag


class CritiqueError(ValueError):
    """First arg is a stable reason code (redundant-edit, bad-index, ...)."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(reason, detail)
        self.reason = reason
        self.detail = detail


@dataclass
class CritiqueParams:
    threshold: float = 0.015
    decay: float = 0.9
    max_iters: int = 50

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    def as_dict(self) -> dict:
        return {"threshold": self.threshold, "decay": self.decay,
                "max_iters": self.max_iters}


@dataclass
class CritiqueTrace:
    gaps: list = field(default_factory=list)  # length iterations + 1
    step_norms: list = field(default_factory=list)  # length iterations
    iterations: int = 0
    converged: bool = False
    reason: str = ""  # converged | max-iters | vanished-gradient

    def as_dict(self) -> dict:
        return {
            "gaps": [float(g) for g in self.gaps],
            "step_norms": [float(s) for s in self.step_norms],
            "iterations": self.iterations,
            "converged": self.converged,
            "reason": self.reason,
        }


def impose_edits(bits: np.ndarray, edits) -> np.ndarray:
    """Apply add/remove edits without validation (idempotent imposition)."""
    out = np.asarray(bits, dtype=np.float32).copy()
    for index, action in edits:
        if not 0 <= index < out.shape[-1]:
            raise CritiqueError("bad-index", f"keyphrase index {index} out of range")
        if action not in ("add", "remove"):
            raise CritiqueError("bad-action", f"unknown action {action!r}")
        out[..., index] = 1.0 if action == "add" else 0.0
    return out


def make_critique_vector(current_bits: np.ndarray, edits) -> np.ndarray:
    """Validated edit of a displayed explanation's bit vector.

    An add must target a 0-bit and a remove a 1-bit, judged against the
    vector as the edit sequence has transformed it so far.
    """
    out = np.asarray(current_bits, dtype=np.float32).copy()
    if out.ndim != 1:
        raise CritiqueError("bad-vector", "expected a single bit vector")
    for index, action in edits:
        if not 0 <= index < out.shape[0]:
            raise CritiqueError("bad-index", f"keyphrase index {index} out of range")
        if action == "add":
            if out[index] == 1.0:
                raise CritiqueError("redundant-edit", f"keyphrase {index} already present")
            out[index] = 1.0
        elif action == "remove":
            if out[index] == 0.0:
                raise CritiqueError("redundant-edit", f"keyphrase {index} already absent")
            out[index] = 0.0
        else:
            raise CritiqueError("bad-action", f"unknown action {action!r}")
    return out


def _gaps_and_grads(net, z_data: np.ndarray, targets: np.ndarray):
    """Per-row explanation gap and d(per-row mean BCE)/dz."""
    n_rows = z_data.shape[0]
    z = Tensor(z_data, requires_grad=True)
    tape = Tape()
    with _frozen_params(net), use_tape(tape):
        logits = net.keyphrase_logits(z)
        # scale the all-element mean by the row count so each row's grad
        # is the gradient of its own K-mean BCE
        loss = scale(bce_with_logits(logits, targets), float(n_rows))
    probs = sigmoid(logits.detach()).data
    gaps = np.abs(probs - targets).mean(axis=1)
    backward(loss, tape)
    return gaps, z.grad.copy()


def apply_critique_batch(net, z0: np.ndarray, targets: np.ndarray, params: CritiqueParams):
    """Edit a matrix of latents row-wise toward row-wise bit targets.

    All rows share the step schedule (the step at iteration t has norm
    decay^(t-1)); rows freeze individually as they converge. Returns the
    edited matrix and one CritiqueTrace per row.
    """
    z = np.array(z0, dtype=net.dtype, copy=True)
    targets = np.asarray(targets, dtype=net.dtype)
    if z.ndim != 2 or targets.shape != (z.shape[0], net.n_keyphrases):
        raise CritiqueError("bad-shape", f"z {z.shape} targets {targets.shape}")
    n_rows = z.shape[0]
    traces = [CritiqueTrace() for _ in range(n_rows)]

    gaps, grads = _gaps_and_grads(net, z, targets)
    active = np.ones(n_rows, dtype=bool)
    for r in range(n_rows):
        traces[r].gaps.append(float(gaps[r]))
        if gaps[r] <= params.threshold:
            traces[r].converged = True
            traces[r].reason = "converged"
            active[r] = False

    for t in range(1, params.max_iters + 1):
        if not active.any():
            break
        step_len = params.decay ** (t - 1)
        norms = np.linalg.norm(grads, axis=1)
        for r in np.nonzero(active)[0]:
            if norms[r] < VANISH_EPS:
                traces[r].converged = False
                traces[r].reason = "vanished-gradient"
                active[r] = False
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        deltas = (step_len / norms[rows])[:, None] * grads[rows]
        z[rows] -= deltas.astype(net.dtype)
        for r, delta in zip(rows, deltas):
            traces[r].step_norms.append(float(np.linalg.norm(delta)))
            traces[r].iterations += 1

        gaps, grads = _gaps_and_grads(net, z, targets)
        for r in rows:
            traces[r].gaps.append(float(gaps[r]))
            if gaps[r] <= params.threshold:
                traces[r].converged = True
                traces[r].reason = "converged"
                active[r] = False
            elif t == params.max_iters:
                traces[r].converged = False
                traces[r].reason = "max-iters"
                active[r] = False
    return z, traces


def apply_critique(net, z0: np.ndarray, target_bits: np.ndarray, params: CritiqueParams):
    """Single-latent form of apply_critique_batch: (d,) -> ((d,), trace)."""
    z0 = np.asarray(z0)
    z, traces = apply_critique_batch(net, z0[None, :], np.asarray(target_bits)[None, :], params)
    return z[0], traces[0]
