"""
Per-sample error measures: vertex error and near-plane bounding boxes.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from meshing.mesh import StructureId
from utils.constants import BBOX_DEPTH_FRACTION
from utils.errors import ShapeError


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box [x_min, x_max] x [y_min, y_max] in pixels."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError(f"inverted box {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def mkpts_err(pred: np.ndarray, gt: np.ndarray, image_size: int) -> float:
    """
    Mean Euclidean vertex error as a percentage of the image size.

    Raises:
        ShapeError: If the shapes differ
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"mkpts_err: shapes {pred.shape} and {gt.shape} differ")
    return float(np.mean(np.linalg.norm(pred - gt, axis=-1)) / image_size * 100.0)


def structure_bbox(
    coords: np.ndarray,
    structure_of_vertex: np.ndarray,
    structure: StructureId,
    image_size: int,
    depth_fraction: float = BBOX_DEPTH_FRACTION,
) -> Optional[BoundingBox]:
    """
    Box around the vertices of `structure` that lie close to the image plane.

    Args:
        coords: (N, 3) plane coordinates in pixels
        structure_of_vertex: (N,) structure codes of the template
        structure: Structure to box
        image_size: Image side length; vertices with |z| < depth_fraction * size count
        depth_fraction: Near-plane threshold relative to the image size

    Returns:
        BoundingBox, or None when no vertex of the structure is near the plane
    """
    coords = np.asarray(coords, dtype=np.float64)
    near = (np.asarray(structure_of_vertex) == int(structure)) & (
        np.abs(coords[:, 2]) < depth_fraction * image_size
    )
    if not near.any():
        return None
    xy = coords[near, :2]
    lower, upper = xy.min(axis=0), xy.max(axis=0)
    return BoundingBox(float(lower[0]), float(lower[1]), float(upper[0]), float(upper[1]))


def bbox_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; two identical zero-area boxes give 1.0."""
    width = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    height = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    intersection = max(width, 0.0) * max(height, 0.0)
    union = a.area + b.area - intersection
    if union <= 0.0:
        return 1.0 if a.as_tuple() == b.as_tuple() else 0.0
    return float(np.clip(intersection / union, 0.0, 1.0))
