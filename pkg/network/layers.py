"""
Network layers with hand-written backward passes.

Image tensors are (B, C, H, W); vertex tensors are (B, N, C).

Author: EchoViews Contributors
License: MIT
"""

from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from utils.base_layer import Layer
from utils.errors import ShapeError


def he_uniform(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform He initialisation: U(-sqrt(6 / fan_in), sqrt(6 / fan_in))."""
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Conv2D(Layer):
    """3x3 convolution, stride 2, zero padding 1."""

    KERNEL = 3
    STRIDE = 2
    PADDING = 1

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        k = self.KERNEL
        self.params["weight"] = he_uniform(rng, in_channels * k * k, (out_channels, in_channels, k, k))
        self.params["bias"] = np.zeros(out_channels)
        self._windows: Optional[np.ndarray] = None
        self._input_shape: Optional[tuple[int, ...]] = None

    @property
    def name(self) -> str:
        return f"Conv2D({self.in_channels}->{self.out_channels})"

    @property
    def description(self) -> str:
        return "3x3 convolution with stride 2 and zero padding"

    @staticmethod
    def output_size(size: int) -> int:
        return (size + 2 * Conv2D.PADDING - Conv2D.KERNEL) // Conv2D.STRIDE + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeError(f"{self.name}: expected (B, {self.in_channels}, H, W), got {x.shape}")
        p, s = self.PADDING, self.STRIDE
        padded = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        windows = sliding_window_view(padded, (self.KERNEL, self.KERNEL), axis=(2, 3))[:, :, ::s, ::s]
        self._windows = windows
        self._input_shape = x.shape
        out = np.tensordot(windows, self.params["weight"], axes=([1, 4, 5], [1, 2, 3]))
        return out.transpose(0, 3, 1, 2) + self.params["bias"][None, :, None, None]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        windows = self._windows
        batch, channels, height, width = self._input_shape
        out_h, out_w = grad.shape[2], grad.shape[3]
        p, s = self.PADDING, self.STRIDE

        self.grads["weight"] = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        self.grads["bias"] = grad.sum(axis=(0, 2, 3))

        # (B, C, Ho, Wo, 3, 3) gradient of every window, scattered back
        window_grad = np.tensordot(grad, self.params["weight"], axes=([1], [0]))
        window_grad = window_grad.transpose(0, 3, 1, 2, 4, 5)
        padded = np.zeros((batch, channels, height + 2 * p, width + 2 * p), dtype=grad.dtype)
        for i in range(self.KERNEL):
            for j in range(self.KERNEL):
                padded[:, :, i : i + s * out_h : s, j : j + s * out_w : s] += window_grad[..., i, j]
        return padded[:, :, p : p + height, p : p + width]


class ReLU(Layer):
    @property
    def name(self) -> str:
        return "ReLU"

    @property
    def description(self) -> str:
        return "max(x, 0)"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad * self._mask


class ELU(Layer):
    """Exponential linear unit with alpha = 1."""

    def __init__(self, alpha: float = 1.0):
        super().__init__()
        self.alpha = alpha

    @property
    def name(self) -> str:
        return "ELU"

    @property
    def description(self) -> str:
        return "x for x > 0, alpha * (exp(x) - 1) otherwise"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return np.where(x > 0, x, self.alpha * np.expm1(np.minimum(x, 0)))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._x
        return grad * np.where(x > 0, 1.0, self.alpha * np.exp(np.minimum(x, 0))).astype(grad.dtype)


class GlobalAvgPool(Layer):
    """(B, C, H, W) -> (B, C) mean over the spatial axes."""

    @property
    def name(self) -> str:
        return "GlobalAvgPool"

    @property
    def description(self) -> str:
        return "Spatial mean per channel"

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError(f"{self.name}: expected (B, C, H, W), got {x.shape}")
        self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        height, width = self._shape[2], self._shape[3]
        return np.broadcast_to(grad[:, :, None, None] / (height * width), self._shape).copy()


class Dense(Layer):
    """Affine map on the last axis: y = x @ W + b, any leading axes."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.params["weight"] = he_uniform(rng, in_features, (in_features, out_features))
        self.params["bias"] = np.zeros(out_features)

    @property
    def name(self) -> str:
        return f"Dense({self.in_features}->{self.out_features})"

    @property
    def description(self) -> str:
        return "Fully connected affine map"

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.in_features:
            raise ShapeError(f"{self.name}: last axis must be {self.in_features}, got {x.shape}")
        self._x = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        flat_x = self._x.reshape(-1, self.in_features)
        flat_grad = grad.reshape(-1, self.out_features)
        self.grads["weight"] = flat_x.T @ flat_grad
        self.grads["bias"] = flat_grad.sum(axis=0)
        return grad @ self.params["weight"].T


class Sequential(Layer):
    """Layers applied in order; parameters are exposed as '<index>.<key>'."""

    def __init__(self, layers: list[Layer], label: str = "Sequential"):
        super().__init__()
        self.layers = layers
        self.label = label

    @property
    def name(self) -> str:
        return self.label

    @property
    def description(self) -> str:
        return " -> ".join(layer.name for layer in self.layers)

    def named_parameters(self, prefix: str = ""):
        for index, layer in enumerate(self.layers):
            yield from layer.named_parameters(f"{prefix}{index}.")

    @property
    def n_parameters(self) -> int:
        return sum(layer.n_parameters for layer in self.layers)

    def named_gradients(self, prefix: str = ""):
        for index, layer in enumerate(self.layers):
            yield from layer.named_gradients(f"{prefix}{index}.")

    def astype(self, dtype: np.dtype) -> "Sequential":
        for layer in self.layers:
            layer.astype(dtype)
        return self

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad
