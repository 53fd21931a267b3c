"""
Direct view classifier.

Baseline for the mesh route: the same image encoder followed by a dense
layer over the four view classes, trained with cross-entropy. Its
predictions are reported next to the plane-fit view recognition.

Author: EchoViews Contributors
License: MIT
"""

import logging
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from dataset.sample import ViewSample
from network.checkpoint import read_header, restore_parameters, write_archive
from network.layers import Dense
from network.losses import cross_entropy_loss
from network.model import build_encoder, prepare_images
from network.optim import Adam
from utils.base_layer import Layer
from utils.constants import DEFAULT_ENCODER_CHANNELS, VIEW_CODES
from utils.errors import ConfigError, NumericalError, ShapeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ViewClassifier(Layer):
    """Encoder plus a linear view head producing (B, 4) logits."""

    def __init__(
        self,
        image_size: int,
        encoder_channels: Sequence[int] = DEFAULT_ENCODER_CHANNELS,
        seed: int = 0,
        dtype=np.float32,
    ):
        super().__init__()
        self.image_size = int(image_size)
        self.encoder_channels = tuple(encoder_channels)
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.encoder = build_encoder(self.encoder_channels, rng)
        self.head = Dense(self.encoder_channels[-1], len(VIEW_CODES), rng)
        self.astype(dtype)

    @property
    def name(self) -> str:
        return "ViewClassifier"

    @property
    def description(self) -> str:
        return f"encoder {list(self.encoder_channels)} -> dense -> {len(VIEW_CODES)} views"

    @property
    def dtype(self) -> np.dtype:
        return self.head.params["weight"].dtype

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        yield from self.encoder.named_parameters(prefix + "encoder.")
        yield from self.head.named_parameters(prefix + "head.")

    def named_gradients(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        yield from self.encoder.named_gradients(prefix + "encoder.")
        yield from self.head.named_gradients(prefix + "head.")

    @property
    def n_parameters(self) -> int:
        return self.encoder.n_parameters + self.head.n_parameters

    def astype(self, dtype) -> "ViewClassifier":
        self.encoder.astype(dtype)
        self.head.astype(dtype)
        return self

    def forward(self, images: np.ndarray) -> np.ndarray:
        if images.ndim != 4 or images.shape[1:] != (1, self.image_size, self.image_size):
            raise ShapeError(
                f"expected (B, 1, {self.image_size}, {self.image_size}) images, got {images.shape}"
            )
        return self.head.forward(self.encoder.forward(images.astype(self.dtype, copy=False)))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return self.encoder.backward(self.head.backward(grad))

    def predict(self, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
        """View codes (argmax of the logits) for (B, S, S) label rasters."""
        labels = []
        for start in range(0, len(images), batch_size):
            logits = self.forward(prepare_images(images[start : start + batch_size], self.dtype))
            labels.append(np.argmax(logits, axis=1))
        return np.concatenate(labels).astype(np.int64)

    def header(self) -> dict:
        return {
            "encoder_channels": list(self.encoder_channels),
            "image_size": self.image_size,
            "seed": self.seed,
        }


def train_classifier(
    samples: Sequence[ViewSample],
    config,
    checkpoint_path: Optional[PathLike] = None,
) -> tuple[ViewClassifier, list[float]]:
    """
    Train a ViewClassifier with the optimiser settings of a TrainConfig.

    Returns:
        (classifier, mean loss per epoch)

    Raises:
        ConfigError: If there are no samples
        NumericalError: On a non-finite loss
    """
    if not samples:
        raise ConfigError("training set is empty")
    model = ViewClassifier(samples[0].image_size, config.encoder_channels, config.seed, config.dtype)
    optimizer = Adam(config.adam)
    rng = np.random.default_rng([config.seed, 1])
    images = np.stack([s.image for s in samples])
    labels = np.array([int(s.view) for s in samples], dtype=np.int64)
    params = dict(model.named_parameters())

    losses: list[float] = []
    steps = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(samples))
        total = 0.0
        seen = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            logits = model.forward(prepare_images(images[batch], config.dtype))
            loss, grad = cross_entropy_loss(logits, labels[batch])
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite classifier loss at step {steps + 1}")
            model.backward(grad)
            optimizer.step(params, dict(model.named_gradients()))
            steps += 1
            total += loss * len(batch)
            seen += len(batch)
            if config.max_steps is not None and steps >= config.max_steps:
                break
        losses.append(total / seen)
        logger.debug("classifier epoch %d: loss %.6g", epoch, losses[-1])
        if config.max_steps is not None and steps >= config.max_steps:
            break

    if checkpoint_path is not None:
        save_classifier(model, checkpoint_path, {"epochs": len(losses), "seed": config.seed})
    logger.info("classifier trained for %d epoch(s), final loss %.6g", len(losses), losses[-1])
    return model, losses


def save_classifier(model: ViewClassifier, path: PathLike, extra: Optional[dict] = None) -> Path:
    return write_archive(path, "classifier", model.header(), model.named_parameters(), extra)


def load_classifier(path: PathLike, dtype=np.float32) -> ViewClassifier:
    arch = read_header(path, kind="classifier")["model"]
    model = ViewClassifier(arch["image_size"], arch["encoder_channels"], arch["seed"], dtype)
    restore_parameters(path, model)
    return model
