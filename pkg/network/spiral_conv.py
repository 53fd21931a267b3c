"""
Spiral convolution.

For every vertex the features of its spiral are concatenated in spiral order
(sentinel slots contribute zeros) and passed through gamma, an affine map
optionally followed by further ELU + affine stages.

The gather is a sparse (N * l, N + 1) selection matrix; its transpose
scatters gradients back, summing over every spiral a vertex appears in.

Author: EchoViews Contributors
License: MIT
"""

import numpy as np
from scipy import sparse

from network.layers import ELU, Dense
from network.spirals import SpiralIndex
from utils.base_layer import Layer
from utils.errors import ShapeError


def gather_matrix(spirals: SpiralIndex) -> sparse.csr_matrix:
    """(N * l, N + 1) 0/1 matrix; row i * l + k selects spirals.indices[i, k]."""
    n, length = spirals.indices.shape
    rows = np.arange(n * length)
    data = np.ones(n * length)
    return sparse.csr_matrix(
        (data, (rows, spirals.indices.ravel())), shape=(n * length, spirals.pad_index + 1)
    )


class SpiralConv(Layer):
    """
    Spiral convolution (B, N, C_in) -> (B, N, C_out).

    Args:
        in_channels: Input features per vertex
        out_channels: Output features per vertex
        spirals: Spiral orderings of the mesh
        rng: Initialisation generator
        mlp_depth: Number of affine stages in gamma (>= 1)
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        spirals: SpiralIndex,
        rng: np.random.Generator,
        mlp_depth: int = 1,
    ):
        super().__init__()
        if mlp_depth < 1:
            raise ValueError(f"mlp_depth must be >= 1, got {mlp_depth}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.spirals = spirals
        self._gather = gather_matrix(spirals)
        self._gather_t = self._gather.T.tocsr()
        self.stages: list[Layer] = [Dense(in_channels * spirals.length, out_channels, rng)]
        for _ in range(mlp_depth - 1):
            self.stages.append(ELU())
            self.stages.append(Dense(out_channels, out_channels, rng))

    @property
    def name(self) -> str:
        return f"SpiralConv({self.in_channels}->{self.out_channels}, l={self.spirals.length})"

    @property
    def description(self) -> str:
        return "Concatenate spiral neighbour features, then apply an affine map"

    def named_parameters(self, prefix: str = ""):
        for index, stage in enumerate(self.stages):
            yield from stage.named_parameters(f"{prefix}gamma.{index}.")

    @property
    def n_parameters(self) -> int:
        return sum(stage.n_parameters for stage in self.stages)

    def named_gradients(self, prefix: str = ""):
        for index, stage in enumerate(self.stages):
            for key, value in stage.grads.items():
                yield f"{prefix}gamma.{index}.{key}", value

    def astype(self, dtype: np.dtype) -> "SpiralConv":
        for stage in self.stages:
            stage.astype(dtype)
        return self

    def gather(self, x: np.ndarray) -> np.ndarray:
        """(B, N, C) -> (B, N, l * C) spiral-concatenated features."""
        batch, n, channels = x.shape
        padded = np.concatenate([x, np.zeros((batch, 1, channels), dtype=x.dtype)], axis=1)
        columns = padded.transpose(1, 0, 2).reshape(n + 1, batch * channels)
        gathered = (self._gather @ columns).astype(x.dtype, copy=False)
        gathered = gathered.reshape(n, self.spirals.length, batch, channels)
        return gathered.transpose(2, 0, 1, 3).reshape(batch, n, self.spirals.length * channels)

    def scatter(self, grad: np.ndarray) -> np.ndarray:
        """Adjoint of gather: (B, N, l * C) -> (B, N, C)."""
        batch, n, _ = grad.shape
        channels = self.in_channels
        rows = grad.reshape(batch, n, self.spirals.length, channels).transpose(1, 2, 0, 3)
        rows = rows.reshape(n * self.spirals.length, batch * channels)
        columns = (self._gather_t @ rows).astype(grad.dtype, copy=False)
        return columns[:n].reshape(n, batch, channels).transpose(1, 0, 2)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.spirals.n_vertices or x.shape[2] != self.in_channels:
            raise ShapeError(
                f"{self.name}: expected (B, {self.spirals.n_vertices}, {self.in_channels}), "
                f"got {x.shape}"
            )
        out = self.gather(x)
        for stage in self.stages:
            out = stage.forward(out)
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for stage in reversed(self.stages):
            grad = stage.backward(grad)
        return self.scatter(grad)
