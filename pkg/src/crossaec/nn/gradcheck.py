"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from crossaec.nn.params import ParameterStore
from crossaec.nn.tensor import Tensor


def gradient_check(
    loss_fn: Callable[[], Tensor],
    store: ParameterStore,
    coords_per_tensor: int = 20,
    h: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn`` must be a pure function of the store's current values.
    For each tensor, at least ``coords_per_tensor`` coordinates (all of
    them for small tensors) are perturbed by ``±h``. The relative error
    for a coordinate is |analytic - numeric| / max(|analytic|, |numeric|,
    1e-8).
    """
    store.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data))
        for name, t in store.items()
    }

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, param in store.items():
        flat = param.data.reshape(-1)
        n = flat.size
        if n <= coords_per_tensor:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=coords_per_tensor, replace=False)
        grad_flat = analytic[name].reshape(-1)
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + h
            up = float(loss_fn().data)
            flat[idx] = original - h
            down = float(loss_fn().data)
            flat[idx] = original
            numeric = (up - down) / (2.0 * h)
            a = float(grad_flat[idx])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if err > worst:
                worst = err
    return worst
