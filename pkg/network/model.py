"""
Image-to-mesh network.

    label image (B, 1, S, S), values / 4
      -> 5 x (Conv2D stride 2, ReLU), global average pool   -> (B, 128)
      -> Dense compression                                  -> (B, N, C0)
      -> spiral layers with the channel plan, ELU after each
      -> per-vertex Dense head                              -> (B, N, 3)

The output is the mesh in plane coordinates divided by the image size.

Author: EchoViews Contributors
License: MIT
"""

import logging
from typing import Iterator, Sequence

import numpy as np

from network.layers import ELU, Conv2D, Dense, GlobalAvgPool, ReLU, Sequential
from network.spiral_conv import SpiralConv
from network.spirals import SpiralIndex
from utils.base_layer import Layer
from utils.constants import BACKGROUND_CODE, DEFAULT_CHANNEL_PLAN, DEFAULT_ENCODER_CHANNELS
from utils.errors import ShapeError

logger = logging.getLogger(__name__)

# Initial head bias: mesh centred in the image, on the image plane
HEAD_BIAS_INIT = (0.5, 0.5, 0.0)
LABEL_SCALE = 4.0


def prepare_images(images: np.ndarray, dtype=np.float32) -> np.ndarray:
    """(B, S, S) label rasters -> (B, 1, S, S) floats in [0, 1]."""
    images = np.asarray(images)
    if images.ndim == 2:
        images = images[None]
    if images.ndim != 3:
        raise ShapeError(f"expected (B, S, S) label images, got {images.shape}")
    scaled = (images.astype(np.float64) - BACKGROUND_CODE) / LABEL_SCALE
    return scaled[:, None].astype(dtype)


def build_encoder(channels: Sequence[int], rng: np.random.Generator) -> Sequential:
    layers: list[Layer] = []
    previous = 1
    for width in channels:
        layers.append(Conv2D(previous, width, rng))
        layers.append(ReLU())
        previous = width
    layers.append(GlobalAvgPool())
    return Sequential(layers, label="Encoder")


class GcnModel(Layer):
    """
    Encoder, dense compression, spiral decoder and head.

    ELU sits between consecutive spiral layers; the last spiral layer feeds
    the linear head directly.

    Args:
        spirals: Spiral orderings of the template
        image_size: Input width and height
        channel_plan: Output widths of the spiral layers; the first entry
            is also the width of the compressed per-vertex features
        encoder_channels: Conv widths
        mlp_depth: Affine stages per spiral layer
        seed: Initialisation seed
        dtype: Parameter dtype (float32 for training, float64 for checks)
    """

    def __init__(
        self,
        spirals: SpiralIndex,
        image_size: int,
        channel_plan: Sequence[int] = DEFAULT_CHANNEL_PLAN,
        encoder_channels: Sequence[int] = DEFAULT_ENCODER_CHANNELS,
        mlp_depth: int = 1,
        seed: int = 0,
        dtype=np.float32,
    ):
        super().__init__()
        if not channel_plan or not encoder_channels:
            raise ValueError("channel_plan and encoder_channels must not be empty")
        rng = np.random.default_rng(seed)
        self.spirals = spirals
        self.image_size = int(image_size)
        self.channel_plan = tuple(int(c) for c in channel_plan)
        self.encoder_channels = tuple(int(c) for c in encoder_channels)
        self.mlp_depth = mlp_depth
        self.seed = seed
        self.n_vertices = spirals.n_vertices

        self.encoder = build_encoder(self.encoder_channels, rng)
        self.compression = Dense(self.encoder_channels[-1], self.n_vertices * self.channel_plan[0], rng)
        decoder: list[Layer] = []
        previous = self.channel_plan[0]
        for index, width in enumerate(self.channel_plan):
            if index > 0:
                decoder.append(ELU())
            decoder.append(SpiralConv(previous, width, spirals, rng, mlp_depth))
            previous = width
        self.decoder = Sequential(decoder, label="SpiralDecoder")
        self.head = Dense(previous, 3, rng)
        self.head.params["bias"] = np.array(HEAD_BIAS_INIT)
        self.astype(dtype)

    @property
    def name(self) -> str:
        return "GcnModel"

    @property
    def description(self) -> str:
        return (
            f"encoder {list(self.encoder_channels)} -> dense -> spiral {list(self.channel_plan)} "
            f"(l={self.spirals.length}) -> head, N={self.n_vertices}"
        )

    @property
    def dtype(self) -> np.dtype:
        return self.head.params["weight"].dtype

    def components(self) -> list[tuple[str, Layer]]:
        return [
            ("encoder.", self.encoder),
            ("compression.", self.compression),
            ("decoder.", self.decoder),
            ("head.", self.head),
        ]

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for name, component in self.components():
            yield from component.named_parameters(prefix + name)

    def named_gradients(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for name, component in self.components():
            yield from component.named_gradients(prefix + name)

    @property
    def n_parameters(self) -> int:
        return sum(component.n_parameters for _, component in self.components())

    def astype(self, dtype) -> "GcnModel":
        for _, component in self.components():
            component.astype(dtype)
        return self

    def encode(self, images: np.ndarray) -> np.ndarray:
        """(B, 1, S, S) inputs -> (B, 128) global features."""
        if images.ndim != 4 or images.shape[1:] != (1, self.image_size, self.image_size):
            raise ShapeError(
                f"expected (B, 1, {self.image_size}, {self.image_size}) images, got {images.shape}"
            )
        return self.encoder.forward(images.astype(self.dtype, copy=False))

    def forward(self, images: np.ndarray) -> np.ndarray:
        """(B, 1, S, S) inputs -> (B, N, 3) normalised plane coordinates."""
        features = self.encode(images)
        compressed = self.compression.forward(features)
        vertex_features = compressed.reshape(-1, self.n_vertices, self.channel_plan[0])
        return self.head.forward(self.decoder.forward(vertex_features))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if grad.shape[1:] != (self.n_vertices, 3):
            raise ShapeError(f"expected (B, {self.n_vertices}, 3) gradient, got {grad.shape}")
        grad = self.decoder.backward(self.head.backward(grad))
        grad = self.compression.backward(grad.reshape(grad.shape[0], -1))
        return self.encoder.backward(grad)

    def predict(self, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
        """Plane coordinates in pixels for (B, S, S) label rasters."""
        outputs = []
        for start in range(0, len(images), batch_size):
            batch = prepare_images(images[start : start + batch_size], self.dtype)
            outputs.append(self.forward(batch).astype(np.float64) * self.image_size)
        return np.concatenate(outputs, axis=0)

    def header(self) -> dict:
        return {
            "channel_plan": list(self.channel_plan),
            "encoder_channels": list(self.encoder_channels),
            "image_size": self.image_size,
            "mlp_depth": self.mlp_depth,
            "n_vertices": self.n_vertices,
            "seed": self.seed,
            "spiral_length": self.spirals.length,
        }
