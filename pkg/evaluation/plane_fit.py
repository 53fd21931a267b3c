"""
Least-squares plane fitting.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass

import numpy as np

from utils.errors import DegenerateGeometryError

# Eigenvalue ratio below which a point set counts as collinear
RANK_TOLERANCE = 1e-12
SIGN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlaneFit:
    """
    Plane {p : normal . p = offset}.

    Attributes:
        normal: Unit normal, first non-zero component positive
        offset: Signed distance of the plane from the origin along `normal`
        residual: RMS point-to-plane distance of the fitted points
    """

    normal: np.ndarray
    offset: float
    residual: float

    def distances(self, points: np.ndarray) -> np.ndarray:
        """Signed distances of `points` to the plane."""
        return np.asarray(points, dtype=np.float64) @ self.normal - self.offset


def canonical_sign(normal: np.ndarray) -> np.ndarray:
    for component in normal:
        if abs(component) > SIGN_TOLERANCE:
            return normal if component > 0 else -normal
    return normal


def fit_plane(points: np.ndarray) -> PlaneFit:
    """
    Fit a plane through the centroid along the smallest covariance eigenvector.

    Args:
        points: (M, 3) points, M >= 3

    Returns:
        PlaneFit

    Raises:
        DegenerateGeometryError: Fewer than 3 points, or all collinear
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) < 3:
        raise DegenerateGeometryError(f"plane fit needs at least 3 points, got {points.shape}")
    centroid = points.mean(axis=0)
    centred = points - centroid
    covariance = centred.T @ centred / len(points)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    if eigenvalues[2] <= 0 or eigenvalues[1] <= RANK_TOLERANCE * eigenvalues[2]:
        raise DegenerateGeometryError("points are coincident or collinear; no unique plane")

    normal = canonical_sign(eigenvectors[:, 0])
    normal = normal / np.linalg.norm(normal)
    depths = centred @ normal
    return PlaneFit(
        normal=normal,
        offset=float(normal @ centroid),
        residual=float(np.sqrt(np.mean(depths**2))),
    )
