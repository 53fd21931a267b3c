"""
Plots for training and evaluation results.

Generates matplotlib figures: the loss curve, confusion-matrix heat maps
and best/median/worst qualitative overlays of predicted meshes on their
label images.

Author: EchoViews Contributors
License: MIT
"""

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from utils.constants import BBOX_DEPTH_FRACTION
from views.frames import ViewLabel

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Background, LV, RV, LA, RA
LABEL_COLORS = ["#000000", "#e74c3c", "#3498db", "#f1c40f", "#2ecc71"]


class Visualizer:
    """
    Generates PNG plots for training and evaluation.

    Creates up to three kinds of figures:
    1. Train / validation loss per epoch
    2. Confusion matrix heat map of view recognition
    3. Label images with the predicted vertices projected on them
    """

    def __init__(self, output_dir: PathLike):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _save(self, fig, filename: str) -> Path:
        path = self.output_dir / filename
        fig.tight_layout()
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        return path

    def plot_loss_curve(self, history: Sequence, filename: str = "loss_curve.png") -> Optional[Path]:
        if not MATPLOTLIB_AVAILABLE:
            logger.warning("matplotlib not available; skipping %s", filename)
            return None
        epochs = [r.epoch for r in history]
        fig, ax = plt.subplots(figsize=(8, 5))
        ax.semilogy(epochs, [r.train_loss for r in history], label="train", color="#3498db")
        val = [r.val_loss for r in history]
        if np.any(np.isfinite(val)):
            ax.semilogy(epochs, val, label="validation", color="#e74c3c")
        ax.set_xlabel("Epoch", fontsize=12)
        ax.set_ylabel("L2 loss (normalised coordinates)", fontsize=12)
        ax.set_title("EchoViews: Training Loss", fontsize=14, fontweight="bold")
        ax.legend(loc="upper right")
        ax.grid(True, which="both", alpha=0.3)
        return self._save(fig, filename)

    def plot_confusion(
        self, confusion: np.ndarray, filename: str = "confusion.png", title: str = "View Recognition"
    ) -> Optional[Path]:
        if not MATPLOTLIB_AVAILABLE:
            logger.warning("matplotlib not available; skipping %s", filename)
            return None
        names = [view.short_name for view in ViewLabel]
        counts = np.asarray(confusion)
        support = counts.sum(axis=1, keepdims=True)
        rates = np.divide(counts, support, out=np.zeros(counts.shape), where=support > 0)

        fig, ax = plt.subplots(figsize=(6, 5))
        image = ax.imshow(rates, cmap="Blues", vmin=0.0, vmax=1.0)
        for i in range(len(names)):
            for j in range(len(names)):
                color = "white" if rates[i, j] > 0.5 else "black"
                ax.text(j, i, f"{rates[i, j]:.2f}\n({counts[i, j]})", ha="center", va="center", color=color, fontsize=9)
        ax.set_xticks(range(len(names)), labels=names)
        ax.set_yticks(range(len(names)), labels=names)
        ax.set_xlabel("Predicted view", fontsize=12)
        ax.set_ylabel("True view", fontsize=12)
        ax.set_title(f"EchoViews: {title}", fontsize=14, fontweight="bold")
        fig.colorbar(image, ax=ax, fraction=0.046)
        return self._save(fig, filename)

    def plot_overlays(
        self,
        report,
        images: Mapping[str, np.ndarray],
        predictions: Mapping[str, np.ndarray],
        filename: str = "overlays.png",
    ) -> Optional[Path]:
        """
        Best, median and worst samples by mean box IoU.

        Vertices within 5% of the image size of the image plane are drawn
        larger: they are where the predicted mesh meets the image.
        """
        if not MATPLOTLIB_AVAILABLE:
            logger.warning("matplotlib not available; skipping %s", filename)
            return None
        picks = report.best_median_worst()
        if not picks:
            logger.warning("no sample with a box IoU; skipping %s", filename)
            return None

        cmap = ListedColormap(LABEL_COLORS)
        fig, axes = plt.subplots(1, len(picks), figsize=(5 * len(picks), 5))
        for ax, (label, row) in zip(np.atleast_1d(axes), picks):
            image = images[row.sample_id]
            coords = predictions[row.sample_id]
            near = np.abs(coords[:, 2]) < BBOX_DEPTH_FRACTION * image.shape[0]
            ax.imshow(image, cmap=cmap, vmin=0, vmax=len(LABEL_COLORS) - 1, interpolation="nearest")
            ax.scatter(coords[~near, 0], coords[~near, 1], s=2, c="white", alpha=0.4)
            ax.scatter(coords[near, 0], coords[near, 1], s=10, c="#ff00ff")
            ax.set_xlim(0, image.shape[1])
            ax.set_ylim(image.shape[0], 0)
            ax.set_title(
                f"{label}: {row.sample_id}\n{row.true_view.short_name} -> "
                f"{row.predicted_view.short_name}, IoU {row.mean_iou:.2f}",
                fontsize=10,
            )
            ax.axis("off")
        return self._save(fig, filename)
