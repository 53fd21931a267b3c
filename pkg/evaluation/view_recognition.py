"""
View recognition on predicted meshes.

For every standard view the marker vertices of the prediction are fitted
with a plane; the view whose plane is closest to the image plane z = 0 wins.

    score = angle(fit normal, z axis) in degrees
            + lambda * mean |z| of the markers / image_size

Author: EchoViews Contributors
License: MIT
"""

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from evaluation.plane_fit import fit_plane
from utils.constants import DEFAULT_VIEW_LAMBDA
from utils.errors import DegenerateGeometryError, ShapeError
from views.frames import ViewLabel
from views.markers import ViewMarkerSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViewPrediction:
    view: ViewLabel
    scores: dict[ViewLabel, float]


def view_score(marker_coords: np.ndarray, image_size: int, lam: float = DEFAULT_VIEW_LAMBDA) -> float:
    """Score of one view from its marker vertices; +inf when no plane can be fitted."""
    try:
        fit = fit_plane(marker_coords)
    except DegenerateGeometryError:
        return float("inf")
    angle = float(np.degrees(np.arccos(min(1.0, abs(float(fit.normal[2]))))))
    return angle + lam * float(np.mean(np.abs(marker_coords[:, 2]))) / image_size


def predict_view(
    pred_coords: np.ndarray,
    markers: Mapping[ViewLabel, ViewMarkerSet],
    image_size: int,
    lam: float = DEFAULT_VIEW_LAMBDA,
) -> ViewPrediction:
    """
    Recognise the standard view of a predicted mesh.

    Args:
        pred_coords: (N, 3) mesh in plane coordinates, image plane at z = 0
        markers: Marker set of every view
        image_size: Image side length in pixels
        lam: Degrees per unit of mean |z| relative to the image size

    Returns:
        ViewPrediction; ties go to the view listed first in ViewLabel
    """
    pred_coords = np.asarray(pred_coords, dtype=np.float64)
    if pred_coords.ndim != 2 or pred_coords.shape[1] != 3:
        raise ShapeError(f"expected (N, 3) coordinates, got {pred_coords.shape}")

    scores: dict[ViewLabel, float] = {}
    best = None
    for view in ViewLabel:
        marker_set = markers[view]
        scores[view] = view_score(pred_coords[marker_set.vertex_indices], image_size, lam)
        if best is None or scores[view] < scores[best]:
            best = view
    if not np.isfinite(scores[best]):
        logger.warning("no view plane could be fitted; falling back to %s", best.short_name)
    return ViewPrediction(view=best, scores=scores)
