"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every primitive stores a vector-Jacobian closure; ``Tensor.backward``
replays them in reverse topological order. All math is 64-bit: the
finite-difference acceptance gate depends on it.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from crossaec.errors import DegenerateInputError, ShapeError, StateError

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    """Disable graph construction inside the block (inference paths)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    """A float64 ndarray plus an optional gradient and backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._vjp: Optional[Callable[[np.ndarray], None]] = None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every reachable leaf."""
        if self.data.size != 1:
            raise ShapeError("backward requires a scalar loss")
        if not self.requires_grad:
            raise StateError("backward on a tensor with no recorded graph")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._vjp is not None:
                node._vjp(node.grad)

    # Convenience arithmetic for tests and small compositions.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def constant(data) -> Tensor:
    """A tensor that never receives gradients (masks, position tables)."""
    return Tensor(data, requires_grad=False)


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _make(data: np.ndarray, parents: Sequence[Tensor], vjp: Callable) -> Tensor:
    """Wrap an op result, recording the graph only when it matters."""
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    t.grad = g if t.grad is None else t.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient back down to the shape it was broadcast from."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def vjp(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), vjp)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def vjp(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _make(data, (a, b), vjp)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def vjp(g):
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), vjp)


def scale(a: Tensor, factor: float) -> Tensor:
    data = a.data * factor

    def vjp(g):
        _accumulate(a, g * factor)

    return _make(data, (a,), vjp)


def mask_rows(a: Tensor, mask: np.ndarray) -> Tensor:
    """Zero the entries where ``mask`` is false; constant mask, exact zeros."""
    m = np.asarray(mask, dtype=np.float64)
    data = a.data * m

    def vjp(g):
        _accumulate(a, _unbroadcast(g * m, a.data.shape))

    return _make(data, (a,), vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError(
            f"matmul inner dims differ: {a.data.shape} @ {b.data.shape}"
        )
    data = np.matmul(a.data, b.data)

    def vjp(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        _accumulate(a, _unbroadcast(ga, a.data.shape))
        _accumulate(b, _unbroadcast(gb, b.data.shape))

    return _make(data, (a, b), vjp)


def swapaxes(a: Tensor, axis1: int, axis2: int) -> Tensor:
    data = np.swapaxes(a.data, axis1, axis2)

    def vjp(g):
        _accumulate(a, np.swapaxes(g, axis1, axis2))

    return _make(data, (a,), vjp)


def reshape(a: Tensor, shape: tuple) -> Tensor:
    orig = a.data.shape
    data = np.ascontiguousarray(a.data).reshape(shape)

    def vjp(g):
        _accumulate(a, np.ascontiguousarray(g).reshape(orig))

    return _make(data, (a,), vjp)


def relu(a: Tensor) -> Tensor:
    keep = a.data > 0
    data = np.where(keep, a.data, 0.0)

    def vjp(g):
        _accumulate(a, np.where(keep, g, 0.0))

    return _make(data, (a,), vjp)


def tanh(a: Tensor) -> Tensor:
    data = np.tanh(a.data)

    def vjp(g):
        _accumulate(a, g * (1.0 - data * data))

    return _make(data, (a,), vjp)


def tensor_sum(a: Tensor) -> Tensor:
    data = np.asarray(a.data.sum())

    def vjp(g):
        _accumulate(a, np.broadcast_to(g, a.data.shape).copy())

    return _make(data, (a,), vjp)


def masked_softmax(logits: Tensor, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax over the positions where ``mask`` is true.

    Masked positions get exactly zero weight. A row with no allowed
    position is a degenerate input and is rejected.
    """
    m = np.broadcast_to(np.asarray(mask, dtype=bool), logits.data.shape)
    if not m.any(axis=axis).all():
        raise DegenerateInputError("softmax row with every position masked")
    shifted = np.where(m, logits.data, -np.inf)
    shifted = shifted - shifted.max(axis=axis, keepdims=True)
    expd = np.where(m, np.exp(shifted), 0.0)
    probs = expd / expd.sum(axis=axis, keepdims=True)

    def vjp(g):
        inner = (g * probs).sum(axis=axis, keepdims=True)
        _accumulate(logits, probs * (g - inner))

    return _make(probs, (logits,), vjp)


def layer_norm(x: Tensor, gain: Tensor, offset: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then rescale."""
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    data = xhat * gain.data + offset.data

    def vjp(g):
        _accumulate(gain, _unbroadcast(g * xhat, gain.data.shape))
        _accumulate(offset, _unbroadcast(g, offset.data.shape))
        gx = g * gain.data
        mean_gx = gx.mean(axis=-1, keepdims=True)
        mean_gx_xhat = (gx * xhat).mean(axis=-1, keepdims=True)
        _accumulate(x, inv * (gx - mean_gx - xhat * mean_gx_xhat))

    return _make(data, (x, gain, offset), vjp)


def embedding_lookup(weight: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    data = weight.data[ids]

    def vjp(g):
        gw = np.zeros_like(weight.data)
        np.add.at(gw, ids.reshape(-1), g.reshape(-1, weight.data.shape[-1]))
        _accumulate(weight, gw)

    return _make(data, (weight,), vjp)


def cross_entropy(
    logits: Tensor, target_ids: np.ndarray, weights: np.ndarray
) -> Tensor:
    """Weighted negative log-likelihood, summed into a scalar.

    ``weights`` is a constant array broadcastable to ``target_ids``; the
    caller chooses the normalization (per-position mean, per-example
    mean, ...).
    """
    ids = np.asarray(target_ids, dtype=np.int64)
    w = np.broadcast_to(np.asarray(weights, dtype=np.float64), ids.shape)
    if ids.shape != logits.data.shape[:-1]:
        raise ShapeError(
            f"targets {ids.shape} do not match logits {logits.data.shape}"
        )
    x = logits.data
    mx = x.max(axis=-1, keepdims=True)
    lse = mx[..., 0] + np.log(np.exp(x - mx).sum(axis=-1))
    picked = np.take_along_axis(x, ids[..., None], axis=-1)[..., 0]
    data = np.asarray(((lse - picked) * w).sum())

    def vjp(g):
        probs = np.exp(x - mx)
        probs /= probs.sum(axis=-1, keepdims=True)
        at_target = np.take_along_axis(probs, ids[..., None], axis=-1) - 1.0
        np.put_along_axis(probs, ids[..., None], at_target, axis=-1)
        _accumulate(logits, probs * (w * float(g))[..., None])

    return _make(data, (logits,), vjp)


def collect_finite(tensors: Iterable[Tensor]) -> bool:
    """True when every tensor's values (and grads, if any) are finite."""
    for t in tensors:
        if not np.isfinite(t.data).all():
            return False
        if t.grad is not None and not np.isfinite(t.grad).all():
            return False
    return True
