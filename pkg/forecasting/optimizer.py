"""Bias-corrected Adam over a dictionary of named numpy parameters."""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from config.settings import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, DEFAULT_LR
from exceptions.forecast_exceptions import ShapeMismatchError, TrainingError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    lr: float = DEFAULT_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPSILON
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"Invalid learning rate: {self.lr}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"Invalid beta parameter at index 0: {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"Invalid beta parameter at index 1: {self.beta2}")


def adam_step(state: AdamState, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """One Adam update, applied in place; returns ``params``.

    All gradients are checked before anything moves, so a bad gradient leaves
    both the parameters and the moments untouched.
    """
    for name, param in params.items():
        if name not in grads:
            raise ShapeMismatchError(f"no gradient for parameter '{name}'")
        g = grads[name]
        if g.shape != param.shape:
            raise ShapeMismatchError(
                f"gradient of '{name}' has shape {g.shape}, parameter has {param.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for parameter '{name}'", parameter=name)

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    step_size = state.lr / bc1

    for name, param in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        param -= step_size * m / (np.sqrt(v / bc2) + state.eps)

    return params
