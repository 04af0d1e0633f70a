"""Bias-corrected Adam with decoupled weight decay."""

from __future__ import annotations

from typing import Dict, Optional, Set

import numpy as np

from crossaec.errors import ConfigurationError
from crossaec.nn.config import OptimizerConfig
from crossaec.nn.params import ParameterStore


class AdamOptimizer:
    """Adam state (first/second moments) bound to one ParameterStore."""

    def __init__(self, store: ParameterStore, config: OptimizerConfig):
        self.store = store
        self.config = config
        self.step_count = 0
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}

    def step(self, frozen_prefixes: Optional[Set[str]] = None) -> None:
        """Apply one update from the gradients currently in the store.

        Parameters with no gradient, or whose name starts with one of
        ``frozen_prefixes``, are left untouched.
        """
        self.step_count += 1
        cfg = self.config
        t = self.step_count
        bias1 = 1.0 - cfg.beta1**t
        bias2 = 1.0 - cfg.beta2**t
        for name, param in self.store.items():
            if param.grad is None:
                continue
            if frozen_prefixes and any(
                name.startswith(p) for p in frozen_prefixes
            ):
                continue
            g = param.grad
            m = self._m.get(name)
            if m is None:
                m = np.zeros_like(param.data)
                self._m[name] = m
                self._v[name] = np.zeros_like(param.data)
            v = self._v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * (g * g)
            update = (m / bias1) / (np.sqrt(v / bias2) + cfg.epsilon)
            if cfg.weight_decay != 0.0 and not cfg.is_exempt(name):
                update = update + cfg.weight_decay * param.data
            param.data = param.data - cfg.learning_rate * update


def adam_step(
    params: ParameterStore,
    config: OptimizerConfig,
    step_index: int,
    state: Optional[AdamOptimizer] = None,
) -> AdamOptimizer:
    """One Adam update at the given 1-based step index.

    Stateless convenience over :class:`AdamOptimizer`: pass the returned
    object back in to continue the same moment estimates.
    """
    if step_index < 1:
        raise ConfigurationError("step_index must be >= 1")
    if state is None:
        state = AdamOptimizer(params, config)
        state.step_count = step_index - 1
    elif state.step_count != step_index - 1:
        raise ConfigurationError(
            f"step_index {step_index} does not continue optimizer state "
            f"at step {state.step_count}"
        )
    state.step(None)
    return state
