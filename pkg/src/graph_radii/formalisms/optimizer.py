from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from graph_radii.errors import DimensionError
from graph_radii.params import Constants

constants = Constants()


@dataclass
class AdamState:
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> 'AdamState':
        return cls(first_moments=[np.zeros_like(p, dtype=float) for p in params],
                   second_moments=[np.zeros_like(p, dtype=float) for p in params])


def adam_step(params: Sequence[np.ndarray],
              grads: Sequence[np.ndarray],
              state: AdamState,
              lr: float,
              weight_decay: Union[float, Sequence[float]] = 0.,
              beta_1: float = constants.adam_beta_1,
              beta_2: float = constants.adam_beta_2,
              epsilon: float = constants.adam_epsilon) -> tuple:
    """Performs one bias-corrected Adam update with optional decoupled weight decay.

    Args:
        params: parameter arrays
        grads: gradient of the loss with respect to each parameter array
        state: moment estimates of the previous steps (`AdamState.zeros_like(params)` at start)
        lr: [-] learning rate
        weight_decay: [-] decay rate, for all arrays or one per array
        beta_1: [-] first-moment decay rate
        beta_2: [-] second-moment decay rate
        epsilon: [-] denominator offset

    Returns:
        the updated parameter arrays and the new state (inputs are left untouched)
    """
    if len(params) != len(grads) or len(params) != len(state.first_moments):
        raise DimensionError(f'{len(params)} parameter arrays, {len(grads)} gradients and '
                             f'{len(state.first_moments)} moment estimates.')
    decays = [weight_decay] * len(params) if np.isscalar(weight_decay) else list(weight_decay)

    step = state.step + 1
    new_params, first_moments, second_moments = [], [], []
    for p, g, m, v, decay in zip(params, grads, state.first_moments, state.second_moments, decays):
        if np.shape(p) != np.shape(g):
            raise DimensionError(f'Gradient of shape {np.shape(g)} for a parameter of shape {np.shape(p)}.')
        m = beta_1 * m + (1. - beta_1) * g
        v = beta_2 * v + (1. - beta_2) * g ** 2
        m_hat = m / (1. - beta_1 ** step)
        v_hat = v / (1. - beta_2 ** step)
        update = lr * m_hat / (np.sqrt(v_hat) + epsilon)
        if decay:
            update = update + lr * decay * p
        new_params.append(p - update)
        first_moments.append(m)
        second_moments.append(v)
    return new_params, AdamState(first_moments=first_moments, second_moments=second_moments, step=step)
