"""Reverse-mode autodiff over numpy arrays.

A Tape records one closure per op in execution order, which is already a
topological order of the graph, so the backward sweep is just the list
reversed. With no tape active every op is a plain numpy forward pass:
that is the inference path, and also why encode/predict stay cheap when
serving.

Tensors wrap C-contiguous ndarrays (the kernels require contiguity).
Gradients accumulate into ``.grad``; parameters are ordinary Tensors
constructed with ``requires_grad=True``. Inputs can be marked the same
way, which is how the critique loop gets d(loss)/d(latent) without any
parameter gradients.
"""

from __future__ import annotations

import numpy as np

from . import kernels


class Tape:
    """Ordered record of differentiable ops for one forward pass."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes = []


_ACTIVE: Tape | None = None


class use_tape:
    def __init__(self, tape: Tape):
        self.tape = tape
        self.prev = None

    def __enter__(self) -> Tape:
        global _ACTIVE
        self.prev = _ACTIVE
        _ACTIVE = self.tape
        return self.tape

    def __exit__(self, *exc):
        global _ACTIVE
        _ACTIVE = self.prev
        return False


def active_tape() -> Tape | None:
    return _ACTIVE


class Tensor:
    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        data = np.asarray(data)
        # ascontiguousarray would promote 0-d scalars to shape (1,)
        self.data = np.ascontiguousarray(data) if data.ndim else data
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def _bump(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __add__(self, other):
        return add(self, _lift(other, self.dtype))

    def __sub__(self, other):
        return sub(self, _lift(other, self.dtype))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(_lift(other, self.dtype), self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


def _lift(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _record(out: Tensor, bwd):
    if _ACTIVE is not None and out.requires_grad:
        _ACTIVE.nodes.append((out, bwd))


def _needs(*ts: Tensor) -> bool:
    return _ACTIVE is not None and any(t.requires_grad for t in ts)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == tuple(shape):
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def backward(loss: Tensor, tape: Tape):
    """Run the reverse sweep from a scalar loss over a recorded tape."""
    if loss.size != 1:
        raise ValueError("backward expects a scalar loss")
    loss.grad = np.ones_like(loss.data)
    for out, bwd in reversed(tape.nodes):
        g = out.grad
        if g is None:
            continue
        bwd(g)


def zero_grads(params):
    for p in params:
        p.grad = None


# ------------------------------------------------------------------ algebra


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data, requires_grad=_needs(a, b))

    def bwd(g):
        if a.requires_grad:
            a._bump(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._bump(_unbroadcast(g, b.shape))

    _record(out, bwd)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data - b.data, requires_grad=_needs(a, b))

    def bwd(g):
        if a.requires_grad:
            a._bump(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._bump(_unbroadcast(-g, b.shape))

    _record(out, bwd)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data, requires_grad=_needs(a, b))
    ad, bd = a.data, b.data

    def bwd(g):
        if a.requires_grad:
            a._bump(_unbroadcast(g * bd, a.shape))
        if b.requires_grad:
            b._bump(_unbroadcast(g * ad, b.shape))

    _record(out, bwd)
    return out


def scale(a: Tensor, s: float) -> Tensor:
    out = Tensor(a.data * a.dtype.type(s), requires_grad=_needs(a))

    def bwd(g):
        a._bump(g * a.dtype.type(s))

    _record(out, bwd)
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """a @ b for 2D x 2D, ND x 2D (shared weight), and same-rank batched."""
    out = Tensor(a.data @ b.data, requires_grad=_needs(a, b))
    ad, bd = a.data, b.data

    def bwd(g):
        if b.ndim == 2:
            if a.requires_grad:
                a._bump(g @ bd.T)
            if b.requires_grad:
                k = ad.shape[-1]
                b._bump(ad.reshape(-1, k).T @ g.reshape(-1, g.shape[-1]))
        else:
            if a.requires_grad:
                a._bump(g @ np.swapaxes(bd, -1, -2))
            if b.requires_grad:
                b._bump(np.swapaxes(ad, -1, -2) @ g)

    _record(out, bwd)
    return out


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape), requires_grad=_needs(a))

    def bwd(g):
        a._bump(g.reshape(a.shape))

    _record(out, bwd)
    return out


def transpose(a: Tensor, axes) -> Tensor:
    out = Tensor(np.ascontiguousarray(np.transpose(a.data, axes)), requires_grad=_needs(a))
    inv = np.argsort(axes)

    def bwd(g):
        a._bump(np.ascontiguousarray(np.transpose(g, inv)))

    _record(out, bwd)
    return out


def concat(tensors, axis: int) -> Tensor:
    datas = [t.data for t in tensors]
    out = Tensor(np.concatenate(datas, axis=axis), requires_grad=_needs(*tensors))
    sizes = [d.shape[axis] for d in datas]

    def bwd(g):
        start = 0
        for t, n in zip(tensors, sizes):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(start, start + n)
                t._bump(np.ascontiguousarray(g[tuple(idx)]))
            start += n

    _record(out, bwd)
    return out


def sliced(a: Tensor, key) -> Tensor:
    """Basic (non-repeating) slicing; used for token pooling and splits."""
    out = Tensor(a.data[key], requires_grad=_needs(a))

    def bwd(g):
        if a.grad is None:
            a.grad = np.zeros_like(a.data)
        a.grad[key] += g

    _record(out, bwd)
    return out


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather out of an embedding table; backward is a scatter-add."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    out = Tensor(table.data[ids], requires_grad=_needs(table))
    dim = table.shape[1]

    def bwd(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        kernels.scatter_add_rows(table.grad, ids.ravel(), np.ascontiguousarray(g.reshape(-1, dim)))

    _record(out, bwd)
    return out


def sum_axis(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims), requires_grad=_needs(a))

    def bwd(g):
        if axis is None:
            a._bump(np.broadcast_to(g, a.shape).astype(a.dtype, copy=True))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a._bump(np.broadcast_to(g, a.shape).astype(a.dtype, copy=True))

    _record(out, bwd)
    return out


def mean_axis(a: Tensor, axis: int, keepdims: bool = False) -> Tensor:
    n = a.shape[axis]
    return scale(sum_axis(a, axis=axis, keepdims=keepdims), 1.0 / n)


# -------------------------------------------------------------- activations


def sigmoid(a: Tensor) -> Tensor:
    y = kernels.sigmoid_fwd(a.data)
    out = Tensor(y, requires_grad=_needs(a))

    def bwd(g):
        a._bump(g * y * (1.0 - y))

    _record(out, bwd)
    return out


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    sl = a.dtype.type(slope)
    out = Tensor(kernels.leaky_relu_fwd(a.data, sl), requires_grad=_needs(a))
    ad = a.data

    def bwd(g):
        a._bump(kernels.leaky_relu_bwd(ad, sl, np.ascontiguousarray(g)))

    _record(out, bwd)
    return out


def softmax_last(a: Tensor) -> Tensor:
    """Softmax over the trailing axis, fused row kernel underneath."""
    width = a.shape[-1]
    y2 = kernels.softmax_rows(a.data.reshape(-1, width))
    out = Tensor(y2.reshape(a.shape), requires_grad=_needs(a))

    def bwd(g):
        gx = kernels.softmax_rows_bwd(y2, np.ascontiguousarray(g.reshape(-1, width)))
        a._bump(gx.reshape(a.shape))

    _record(out, bwd)
    return out


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    dim = a.shape[-1]
    x2 = a.data.reshape(-1, dim)
    y2, mean, rstd = kernels.layernorm_fwd(x2, gain.data, bias.data, a.dtype.type(eps))
    out = Tensor(y2.reshape(a.shape), requires_grad=_needs(a, gain, bias))

    def bwd(g):
        gx, ggain, gbias = kernels.layernorm_bwd(
            x2, gain.data, mean, rstd, np.ascontiguousarray(g.reshape(-1, dim))
        )
        if a.requires_grad:
            a._bump(gx.reshape(a.shape))
        if gain.requires_grad:
            gain._bump(ggain)
        if bias.requires_grad:
            bias._bump(gbias)

    _record(out, bwd)
    return out


def dropout(a: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; call sites skip it entirely at inference."""
    if rate <= 0.0:
        return a
    mask = (rng.random(a.shape) >= rate).astype(a.dtype) / a.dtype.type(1.0 - rate)
    out = Tensor(a.data * mask, requires_grad=_needs(a))

    def bwd(g):
        a._bump(g * mask)

    _record(out, bwd)
    return out


# -------------------------------------------------------------------- losses


def label_smoothed_ce(logits: Tensor, targets: np.ndarray, eps: float, pad_id: int) -> Tensor:
    """Mean label-smoothed cross entropy over non-pad positions.

    logits: (N, V); targets: (N,) int ids. Rows whose target is the pad
    id contribute nothing to loss or gradient.
    """
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    losses, probs = kernels.lsce_fwd(logits.data, targets, logits.dtype.type(eps), pad_id)
    count = int((targets != pad_id).sum())
    denom = max(count, 1)
    out = Tensor(np.asarray(losses.sum() / denom, dtype=logits.dtype), requires_grad=_needs(logits))

    def bwd(g):
        grad = kernels.lsce_bwd(
            probs, targets, logits.dtype.type(eps), pad_id, logits.dtype.type(float(g) / denom)
        )
        logits._bump(grad)

    _record(out, bwd)
    return out


def bce_with_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross entropy against 0/1 targets, computed on logits."""
    targets = np.ascontiguousarray(targets, dtype=logits.dtype)
    total = kernels.bce_logits_fwd(logits.data, targets)
    n = logits.size
    out = Tensor(np.asarray(total / n, dtype=logits.dtype), requires_grad=_needs(logits))

    def bwd(g):
        logits._bump(kernels.bce_logits_bwd(logits.data, targets, logits.dtype.type(float(g) / n)))

    _record(out, bwd)
    return out


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.data - np.asarray(target, dtype=pred.dtype)
    n = pred.size
    out = Tensor(np.asarray((diff * diff).sum() / n, dtype=pred.dtype), requires_grad=_needs(pred))

    def bwd(g):
        pred._bump(diff * pred.dtype.type(2.0 * float(g) / n))

    _record(out, bwd)
    return out
