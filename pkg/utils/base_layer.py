"""
Abstract base class for all network layers.

Every layer of the hand-written network follows this interface so models,
the optimiser and the gradient checker can treat layers uniformly.

Author: EchoViews Contributors
License: MIT
"""

from abc import ABC, abstractmethod
from typing import Iterator

import numpy as np


class Layer(ABC):
    """
    Abstract base class for layers with manual backpropagation.

    Parameters live in `params`, gradients of the last backward pass in
    `grads` under the same keys. `forward` caches whatever `backward`
    needs, so a backward call always refers to the most recent forward.

    Example Usage:
        class Scale(Layer):
            @property
            def name(self) -> str:
                return "Scale"

            @property
            def description(self) -> str:
                return "Multiplies the input by a learned scalar"

            def __init__(self):
                super().__init__()
                self.params["a"] = np.ones(1)

            def forward(self, x):
                self._x = x
                return self.params["a"] * x

            def backward(self, grad):
                self.grads["a"] = np.array([np.sum(grad * self._x)])
                return grad * self.params["a"]
    """

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    @property
    @abstractmethod
    def name(self) -> str:
        """Display name of the layer type."""

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line description, shown in model summaries."""

    @abstractmethod
    def forward(self, x: np.ndarray) -> np.ndarray:
        """
        Compute the layer output and cache the inputs of the backward pass.

        Args:
            x: Input batch

        Returns:
            Output batch

        Raises:
            ShapeError: If `x` does not fit the layer
        """

    @abstractmethod
    def backward(self, grad: np.ndarray) -> np.ndarray:
        """
        Propagate `grad` (dLoss/dOutput) through the layer.

        Sets `self.grads` to dLoss/dParam for every parameter.

        Returns:
            dLoss/dInput
        """

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for key, value in self.params.items():
            yield f"{prefix}{key}", value

    def named_gradients(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for key, value in self.grads.items():
            yield f"{prefix}{key}", value

    def zero_grad(self) -> None:
        self.grads = {key: np.zeros_like(value) for key, value in self.params.items()}

    def astype(self, dtype: np.dtype) -> "Layer":
        """Cast parameters in place to `dtype`; returns self."""
        for key in self.params:
            self.params[key] = self.params[key].astype(dtype)
        self.grads = {}
        return self

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}', parameters={self.n_parameters})"

    def __str__(self) -> str:
        return self.name
