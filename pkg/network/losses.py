"""
Losses with their gradients.

Author: EchoViews Contributors
License: MIT
"""

import numpy as np

from utils.errors import ShapeError


def l2_loss(pred: np.ndarray, gt: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Mean squared Euclidean vertex error.

    Args:
        pred: (N, 3) or (B, N, 3) predicted vertices
        gt: Ground truth of the same shape

    Returns:
        (loss, dLoss/dpred); the mean runs over vertices and batch

    Raises:
        ShapeError: If the shapes differ
    """
    if pred.shape != gt.shape or pred.shape[-1] != 3:
        raise ShapeError(f"l2_loss: shapes {pred.shape} and {gt.shape} must match (..., 3)")
    diff = pred - gt
    count = int(np.prod(pred.shape[:-1]))
    loss = float(np.sum(diff.astype(np.float64) ** 2) / count)
    return loss, (2.0 / count) * diff


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Softmax cross-entropy averaged over the batch.

    Args:
        logits: (B, K)
        labels: (B,) integer classes

    Returns:
        (loss, dLoss/dlogits)
    """
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"cross_entropy_loss: logits {logits.shape} vs labels {labels.shape}")
    probabilities = softmax(logits.astype(np.float64))
    batch = logits.shape[0]
    picked = probabilities[np.arange(batch), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, 1e-300))))
    grad = probabilities.copy()
    grad[np.arange(batch), labels] -= 1.0
    return loss, (grad / batch).astype(logits.dtype)
