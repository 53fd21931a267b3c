"""
EchoViews - Image-to-mesh network.

Layers with hand-written backward passes, spiral convolutions over the
template mesh, the full model, training and checkpoints.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .classifier import ViewClassifier, load_classifier, train_classifier
from .gradcheck import GradCheckResult, check_gradients
from .losses import l2_loss
from .model import GcnModel, prepare_images
from .optim import Adam, AdamConfig, adam_step
from .spiral_conv import SpiralConv
from .spirals import SpiralIndex, build_spirals
from .train import EpochRecord, TrainConfig, TrainResult, train

__all__ = [
    "Adam",
    "AdamConfig",
    "EpochRecord",
    "GcnModel",
    "GradCheckResult",
    "SpiralConv",
    "SpiralIndex",
    "TrainConfig",
    "TrainResult",
    "ViewClassifier",
    "adam_step",
    "build_spirals",
    "check_gradients",
    "l2_loss",
    "load_checkpoint",
    "load_classifier",
    "prepare_images",
    "save_checkpoint",
    "train",
    "train_classifier",
]
