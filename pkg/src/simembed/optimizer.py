"""Adam optimizer for a single parameter array."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParameter


@dataclass
class AdamState:
    shape: tuple[int, ...]
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise InvalidParameter("beta1 and beta2 must lie in (0, 1)")
        self.shape = tuple(self.shape)
        self.m = np.zeros(self.shape)
        self.v = np.zeros(self.shape)


def adam_step(params, grad, state: AdamState, lr: float) -> np.ndarray:
    """One bias-corrected Adam update. ``state`` is advanced in place; returns the new parameters."""
    if not lr > 0:
        raise InvalidParameter(f"learning rate must be positive, got {lr}")
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != state.shape or grad.shape != state.shape:
        raise DimensionMismatch(
            f"params {params.shape} / grad {grad.shape} do not match optimizer state {state.shape}"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
