"""Adam over the three FM parameter blocks."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from mixfm.core.errors import ValidationError
from mixfm.core.model import FmGradients, FmParams, check_finite


@dataclass
class AdamState:
    """First/second moments per block, step counter and hyperparameters."""
    m_w0: float
    m_w: np.ndarray
    m_V: np.ndarray
    v_w0: float
    v_w: np.ndarray
    v_V: np.ndarray
    t: int = 0
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValidationError(f"learning rate must be >= 0, got {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValidationError(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")

    @classmethod
    def for_params(cls, params: FmParams, learning_rate: float = 0.001, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> 'AdamState':
        return cls(0.0, np.zeros_like(params.w), np.zeros_like(params.V),
                   0.0, np.zeros_like(params.w), np.zeros_like(params.V),
                   t=0, learning_rate=learning_rate, beta1=beta1, beta2=beta2, eps=eps)


def _moments(m, v, g, beta1: float, beta2: float):
    m = beta1 * m + (1.0 - beta1) * g
    v = beta2 * v + (1.0 - beta2) * (g * g)
    return m, v


def adam_step(state: AdamState, params: FmParams, grads: FmGradients) -> Tuple[AdamState, FmParams]:
    """One bias-corrected Adam update; inputs are left untouched.

    Raises NumericalError naming the block when a gradient is not finite.
    """
    check_finite(grads)
    if grads.w.shape != params.w.shape or grads.V.shape != params.V.shape:
        raise ValidationError(
            f"gradient shapes w={grads.w.shape} V={grads.V.shape} do not match parameters")

    t = state.t + 1
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t

    def _update(param, m, v):
        return param - state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)

    m_w0, v_w0 = _moments(state.m_w0, state.v_w0, grads.w0, state.beta1, state.beta2)
    m_w, v_w = _moments(state.m_w, state.v_w, grads.w, state.beta1, state.beta2)
    m_V, v_V = _moments(state.m_V, state.v_V, grads.V, state.beta1, state.beta2)

    new_params = FmParams(
        float(_update(params.w0, m_w0, v_w0)),
        _update(params.w, m_w, v_w),
        _update(params.V, m_V, v_V),
    )
    new_state = AdamState(float(m_w0), m_w, m_V, float(v_w0), v_w, v_V, t=t,
                          learning_rate=state.learning_rate, beta1=state.beta1,
                          beta2=state.beta2, eps=state.eps)
    return new_state, new_params
