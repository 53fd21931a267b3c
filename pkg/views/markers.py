"""
View markers: template vertices lying close to a standard view plane.

Because every corresponded mesh shares the template's vertex order, the
same indices pick out the standard plane on any predicted mesh.

Author: EchoViews Contributors
License: MIT
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from meshing.mesh import AnatomicalMesh, mesh_bounds
from utils.constants import DEFAULT_MARKER_EPSILON
from utils.errors import DegenerateGeometryError
from views.frames import FrameAngles, ViewLabel, standard_frame, to_plane_coords

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ViewMarkerSet:
    """
    Attributes:
        view: Standard view the markers encode
        vertex_indices: Sorted template indices within `epsilon` of the plane
        epsilon: Distance tolerance in millimetres
    """

    view: ViewLabel
    vertex_indices: np.ndarray
    epsilon: float

    def __len__(self) -> int:
        return int(self.vertex_indices.size)


def default_marker_epsilon(template: AnatomicalMesh) -> float:
    return DEFAULT_MARKER_EPSILON * mesh_bounds(template).diagonal


def encode_view_markers(
    template: AnatomicalMesh,
    view: ViewLabel,
    epsilon: Optional[float] = None,
    angles: Optional[FrameAngles] = None,
) -> ViewMarkerSet:
    """
    Select the template vertices near the standard plane of `view`.

    Args:
        template: Template mesh
        view: Standard view
        epsilon: Distance tolerance in mm; defaults to 2% of the bounding-box diagonal
        angles: Frame angles used to build the standard plane

    Returns:
        ViewMarkerSet with every vertex whose |plane distance| <= epsilon

    Raises:
        ValueError: If epsilon is not positive
        DegenerateGeometryError: If no vertex qualifies
    """
    if epsilon is None:
        epsilon = default_marker_epsilon(template)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    frame = standard_frame(template, view, angles)
    depth = to_plane_coords(template.vertices, frame)[:, 2]
    indices = np.flatnonzero(np.abs(depth) <= epsilon)
    if indices.size == 0:
        raise DegenerateGeometryError(
            f"no template vertex within {epsilon:.4g} mm of the {ViewLabel(view).short_name} "
            "plane; use a larger epsilon"
        )
    logger.debug("%s markers: %d vertices", ViewLabel(view).short_name, indices.size)
    return ViewMarkerSet(view=ViewLabel(view), vertex_indices=indices, epsilon=float(epsilon))


def encode_all_markers(
    template: AnatomicalMesh,
    epsilon: Optional[float] = None,
    angles: Optional[FrameAngles] = None,
) -> dict[ViewLabel, ViewMarkerSet]:
    """Marker sets of all four views, keyed by view."""
    return {view: encode_view_markers(template, view, epsilon, angles) for view in ViewLabel}
