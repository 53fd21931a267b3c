"""
Adam optimiser over named parameter arrays.

Parameters are updated in place, so models keep referencing the same
arrays throughout training.

Author: EchoViews Contributors
License: MIT

References:
    - Kingma, D.P., & Ba, J. (2015). "Adam: A Method for Stochastic
      Optimization". ICLR 2015.
"""

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from utils.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, DEFAULT_LEARNING_RATE
from utils.errors import NumericalError


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON


class Adam:
    """
    Bias-corrected Adam.

    Example:
        optimizer = Adam(AdamConfig(learning_rate=1e-3))
        optimizer.step(dict(model.named_parameters()), dict(model.named_gradients()))
    """

    def __init__(self, config: AdamConfig = AdamConfig()):
        self.config = config
        self.first_moment: dict[str, np.ndarray] = {}
        self.second_moment: dict[str, np.ndarray] = {}
        self.step_count = 0

    def step(self, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray]) -> None:
        """
        Apply one update to every parameter that has a gradient.

        Raises:
            NumericalError: If any gradient is non-finite; nothing is updated
        """
        for name, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                raise NumericalError(f"non-finite gradient for '{name}' at step {self.step_count + 1}")

        self.step_count += 1
        cfg = self.config
        correction1 = 1.0 - cfg.beta1**self.step_count
        correction2 = 1.0 - cfg.beta2**self.step_count
        step_size = cfg.learning_rate / correction1

        for name, grad in grads.items():
            param = params[name]
            if name not in self.first_moment:
                self.first_moment[name] = np.zeros_like(param)
                self.second_moment[name] = np.zeros_like(param)
            m, v = self.first_moment[name], self.second_moment[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * (grad * grad)
            param -= (step_size * m / (np.sqrt(v / correction2) + cfg.epsilon)).astype(param.dtype)


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    config: AdamConfig,
    optimizer: Optional[Adam] = None,
) -> Adam:
    """
    One Adam update; creates the optimiser state on the first call.

    Returns:
        The optimiser holding the moments and step count for the next call
    """
    optimizer = optimizer or Adam(config)
    optimizer.step(params, grads)
    return optimizer
