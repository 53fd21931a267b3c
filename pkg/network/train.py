"""
Mini-batch training of the image-to-mesh model.

Author: EchoViews Contributors
License: MIT
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from dataset.augment import Augmenter
from dataset.sample import ViewSample
from network.checkpoint import save_checkpoint
from network.losses import l2_loss
from network.model import GcnModel, prepare_images
from network.optim import Adam, AdamConfig
from network.spirals import SpiralIndex
from utils.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    DEFAULT_BATCH_SIZE,
    DEFAULT_CHANNEL_PLAN,
    DEFAULT_ENCODER_CHANNELS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SPIRAL_LENGTH,
)
from utils.errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

PRECISIONS = {"float32": np.float32, "float64": np.float64}


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyper-parameters.

    Attributes:
        max_steps: Stop after this many optimiser steps (None: run all epochs)
        precision: 'float32' for training, 'float64' for checks
        augment: Apply appearance augmentation to training inputs
        baseline_classifier: Also train the direct view classifier
    """

    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = 100
    seed: int = 0
    precision: str = "float32"
    spiral_length: int = DEFAULT_SPIRAL_LENGTH
    channel_plan: tuple[int, ...] = DEFAULT_CHANNEL_PLAN
    encoder_channels: tuple[int, ...] = DEFAULT_ENCODER_CHANNELS
    mlp_depth: int = 1
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    max_steps: Optional[int] = None
    augment: bool = False
    baseline_classifier: bool = False

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError(f"train.learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"train.batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"train.epochs must be >= 1, got {self.epochs}")
        if self.precision not in PRECISIONS:
            raise ConfigError(f"train.precision must be one of {sorted(PRECISIONS)}")
        if self.spiral_length < 2:
            raise ConfigError(f"train.spiral_length must be >= 2, got {self.spiral_length}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"train.max_steps must be >= 1, got {self.max_steps}")

    @property
    def dtype(self):
        return PRECISIONS[self.precision]

    @property
    def adam(self) -> AdamConfig:
        return AdamConfig(self.learning_rate, self.beta1, self.beta2, self.epsilon)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    steps: int


@dataclass
class TrainResult:
    """
    Attributes:
        model: Model holding the weights of the best epoch, the same weights
            the checkpoint stores
        history: One record per epoch
        best_epoch: Epoch with the lowest monitored loss (val, or train without val)
        best_loss: That loss
        steps: Optimiser steps taken
    """

    model: GcnModel
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_loss: float = float("inf")
    steps: int = 0


def stack_samples(samples: Sequence[ViewSample], dtype) -> tuple[np.ndarray, np.ndarray]:
    """(B, S, S) label images and (B, N, 3) targets normalised by image size."""
    images = np.stack([s.image for s in samples])
    targets = np.stack([s.gt_coords / s.image_size for s in samples]).astype(dtype)
    return images, targets


def evaluate_loss(model: GcnModel, samples: Sequence[ViewSample], batch_size: int = 32) -> float:
    """Sample-weighted mean L2 loss; NaN for an empty set."""
    if not samples:
        return float("nan")
    images, targets = stack_samples(samples, model.dtype)
    total = 0.0
    for start in range(0, len(samples), batch_size):
        pred = model.forward(prepare_images(images[start : start + batch_size], model.dtype))
        loss, _ = l2_loss(pred, targets[start : start + batch_size])
        total += loss * len(pred)
    return total / len(samples)


def build_model(spirals: SpiralIndex, image_size: int, config: TrainConfig) -> GcnModel:
    return GcnModel(
        spirals=spirals,
        image_size=image_size,
        channel_plan=config.channel_plan,
        encoder_channels=config.encoder_channels,
        mlp_depth=config.mlp_depth,
        seed=config.seed,
        dtype=config.dtype,
    )


def train(
    train_samples: Sequence[ViewSample],
    spirals: SpiralIndex,
    config: TrainConfig,
    val_samples: Sequence[ViewSample] = (),
    checkpoint_path: Optional[Union[str, Path]] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """
    Train a fresh model with Adam on the L2 vertex loss.

    Batches are drawn from a seeded permutation per epoch; with the same
    data and config the loss curve is identical across runs.

    Args:
        train_samples: Training samples (non-empty)
        spirals: Template spirals
        config: Hyper-parameters
        val_samples: Validation samples; may be empty
        checkpoint_path: Where the best model is saved, if given
        on_epoch: Called after every epoch

    Returns:
        TrainResult

    Raises:
        ConfigError: If there are no training samples
        NumericalError: On a non-finite loss or gradient
    """
    if not train_samples:
        raise ConfigError("training set is empty")
    image_size = train_samples[0].image_size
    model = build_model(spirals, image_size, config)
    optimizer = Adam(config.adam)
    augmenter = Augmenter() if config.augment else None
    rng = np.random.default_rng(config.seed)
    images, targets = stack_samples(train_samples, config.dtype)
    params = dict(model.named_parameters())

    result = TrainResult(model=model)
    best_weights: dict[str, np.ndarray] = {}
    logger.info(
        "training %s on %d sample(s), %d parameter(s)",
        model.description,
        len(train_samples),
        model.n_parameters,
    )
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_samples))
        epoch_total = 0.0
        seen = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            inputs = prepare_images(images[batch], config.dtype)
            if augmenter is not None:
                inputs = np.stack([augmenter(x, rng) for x in inputs]).astype(config.dtype)
            pred = model.forward(inputs)
            loss, grad = l2_loss(pred, targets[batch])
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite training loss at step {result.steps + 1}")
            model.backward(grad)
            optimizer.step(params, dict(model.named_gradients()))
            result.steps += 1
            epoch_total += loss * len(batch)
            seen += len(batch)
            if config.max_steps is not None and result.steps >= config.max_steps:
                break

        record = EpochRecord(
            epoch=epoch,
            train_loss=epoch_total / seen,
            val_loss=evaluate_loss(model, val_samples),
            steps=result.steps,
        )
        result.history.append(record)
        monitored = record.val_loss if val_samples else record.train_loss
        if monitored < result.best_loss:
            result.best_loss, result.best_epoch = monitored, epoch
            best_weights = {name: value.copy() for name, value in params.items()}
            if checkpoint_path is not None:
                save_checkpoint(model, checkpoint_path, {"epoch": epoch, "seed": config.seed})
        logger.info(
            "epoch %d: train %.6g, val %.6g (%d steps)",
            epoch,
            record.train_loss,
            record.val_loss,
            result.steps,
        )
        if on_epoch is not None:
            on_epoch(record)
        if config.max_steps is not None and result.steps >= config.max_steps:
            break
    for name, value in best_weights.items():
        params[name][...] = value
    return result
