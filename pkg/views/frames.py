"""
Standard echocardiographic view frames.

A `PlanePose` maps model coordinates (mm) to the plane frame of a cutplane:
x and y span the image, z is the depth orthogonal to it, and the image plane
is z = 0. Standard frames are built from the mesh landmarks only:

- a4ch: origin at the midpoint of the mitral and tricuspid centres, y axis
  from the LV apex towards that origin, x axis towards the mitral valve.
  The plane contains the apex and both valve centres.
- a5ch: the a4ch plane tilted about the lateral axis through the apex,
  towards the aortic valve.
- a2ch / aplax: the a4ch plane turned about the apex-mitral axis; aplax is
  the turn direction that brings the plane closer to the aortic valve, and
  a2ch uses the same direction at the smaller angle.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np

from meshing.mesh import AnatomicalMesh
from utils.constants import (
    COLLINEAR_TOLERANCE,
    DEFAULT_A2CH_ROTATION,
    DEFAULT_A5CH_TILT,
    DEFAULT_APLAX_ROTATION,
    DEFAULT_FIELD_OF_VIEW_MM,
    DEFAULT_IMAGE_ANCHOR,
    ORTHONORMAL_TOLERANCE,
    VIEW_CODES,
)
from utils.errors import DegenerateGeometryError


class ViewLabel(IntEnum):
    """Standard views; codes are stable across files."""

    A2CH = VIEW_CODES["a2ch"]
    A4CH = VIEW_CODES["a4ch"]
    A5CH = VIEW_CODES["a5ch"]
    APLAX = VIEW_CODES["aplax"]

    @property
    def short_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "ViewLabel":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown view '{name}'") from None


@dataclass(frozen=True)
class FrameAngles:
    """View-specific angles of the standard frames, in degrees."""

    a5ch_tilt: float = DEFAULT_A5CH_TILT
    a2ch_rotation: float = DEFAULT_A2CH_ROTATION
    aplax_rotation: float = DEFAULT_APLAX_ROTATION


@dataclass(frozen=True, eq=False)
class PlanePose:
    """
    Rigid transform plus scale: v -> scale * (rotation @ v + translation).

    Attributes:
        rotation: (3, 3) orthonormal matrix, rows are the plane axes in model space
        translation: (3,) offset in model units
        scale: Output units per model unit (pixels per mm once placed in an image)
        view: View the pose was derived from
    """

    rotation: np.ndarray
    translation: np.ndarray
    scale: float
    view: ViewLabel

    def __post_init__(self) -> None:
        rotation = np.asarray(self.rotation, dtype=np.float64)
        translation = np.asarray(self.translation, dtype=np.float64)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise ValueError("rotation must be (3, 3) and translation (3,)")
        if not np.allclose(rotation.T @ rotation, np.eye(3), atol=ORTHONORMAL_TOLERANCE * 1e3):
            raise ValueError("rotation is not orthonormal")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "view", ViewLabel(self.view))

    @property
    def normal(self) -> np.ndarray:
        """Image-plane normal in model coordinates."""
        return self.rotation[2]

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation)

    def inverse(self) -> "PlanePose":
        """Pose mapping plane coordinates back to the model frame."""
        return PlanePose(
            rotation=self.rotation.T,
            translation=-self.scale * (self.rotation.T @ self.translation),
            scale=1.0 / self.scale,
            view=self.view,
        )

    def compose(self, inner: "PlanePose") -> "PlanePose":
        """Pose equal to applying `inner` first, then self."""
        return PlanePose(
            rotation=self.rotation @ inner.rotation,
            translation=self.rotation @ inner.translation + self.translation / inner.scale,
            scale=self.scale * inner.scale,
            view=self.view,
        )

    def to_dict(self) -> dict:
        return {
            "rotation": [[float(c) for c in row] for row in self.rotation],
            "translation": [float(c) for c in self.translation],
            "scale": float(self.scale),
            "view": self.view.short_name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanePose":
        return cls(
            rotation=np.array(data["rotation"], dtype=np.float64),
            translation=np.array(data["translation"], dtype=np.float64),
            scale=float(data["scale"]),
            view=ViewLabel.from_name(data["view"]),
        )


def to_plane_coords(vertices: np.ndarray, pose: PlanePose) -> np.ndarray:
    """
    Express model-frame vertices in the plane frame of `pose`.

    Args:
        vertices: (N, 3) model coordinates
        pose: Plane pose

    Returns:
        (N, 3) coordinates; x, y in the image plane, z the depth
    """
    return pose.apply(vertices)


def axis_rotation(axis: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotation matrix about a unit `axis` by `angle_deg` (right-hand rule)."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    theta = np.radians(angle_deg)
    cross = np.array(
        [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
    )
    return np.eye(3) + np.sin(theta) * cross + (1.0 - np.cos(theta)) * (cross @ cross)


def _unit(vector: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm < COLLINEAR_TOLERANCE:
        raise DegenerateGeometryError(f"degenerate landmarks: {what} has zero length")
    return vector / norm


def _pose_from_axes(e_x: np.ndarray, e_y: np.ndarray, e_z: np.ndarray, origin: np.ndarray, view: ViewLabel) -> PlanePose:
    rotation = np.vstack([e_x, e_y, e_z])
    return PlanePose(rotation=rotation, translation=-rotation @ origin, scale=1.0, view=view)


def _a4ch_axes(mesh: AnatomicalMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    apex = mesh.landmarks["lv_apex"]
    mitral = mesh.landmarks["mitral_center"]
    tricuspid = mesh.landmarks["tricuspid_center"]

    spread = np.linalg.norm(mitral - apex) * np.linalg.norm(tricuspid - apex)
    if spread < COLLINEAR_TOLERANCE or (
        np.linalg.norm(np.cross(mitral - apex, tricuspid - apex)) < COLLINEAR_TOLERANCE * spread
    ):
        raise DegenerateGeometryError(
            "degenerate landmarks: lv_apex, mitral_center and tricuspid_center are collinear"
        )

    origin = (mitral + tricuspid) / 2.0
    e_y = _unit(origin - apex, "apex-to-valve axis")
    lateral = mitral - tricuspid
    e_x = _unit(lateral - np.dot(lateral, e_y) * e_y, "valve axis")
    e_z = np.cross(e_x, e_y)
    return e_x, e_y, e_z, origin


def standard_frame(
    mesh: AnatomicalMesh, view: ViewLabel, angles: Optional[FrameAngles] = None
) -> PlanePose:
    """
    Standard view frame of `mesh` at unit scale (plane coordinates in mm).

    Args:
        mesh: Mesh with all four landmarks
        view: Requested standard view
        angles: View angles; defaults to FrameAngles()

    Returns:
        PlanePose with scale 1

    Raises:
        DegenerateGeometryError: If the landmarks are collinear
    """
    angles = angles or FrameAngles()
    view = ViewLabel(view)
    e_x, e_y, e_z, origin = _a4ch_axes(mesh)
    apex = mesh.landmarks["lv_apex"]
    aortic = mesh.landmarks["aortic_valve_center"]

    if view == ViewLabel.A4CH:
        return _pose_from_axes(e_x, e_y, e_z, origin, view)

    if view == ViewLabel.A5CH:
        # Tilt towards whichever side brings the plane closer to the aortic valve
        candidates = [axis_rotation(e_x, sign * angles.a5ch_tilt) for sign in (1.0, -1.0)]
        distances = [abs(np.dot(q @ e_z, aortic - apex)) for q in candidates]
        q = candidates[int(np.argmin(distances))]
        return _pose_from_axes(q @ e_x, q @ e_y, q @ e_z, apex + q @ (origin - apex), view)

    mitral = mesh.landmarks["mitral_center"]
    axis = _unit(mitral - apex, "apex-to-mitral axis")
    normals = [axis_rotation(axis, sign * angles.aplax_rotation) @ e_z for sign in (1.0, -1.0)]
    sign = (1.0, -1.0)[int(np.argmin([abs(np.dot(n, aortic - apex)) for n in normals]))]
    turn = angles.aplax_rotation if view == ViewLabel.APLAX else angles.a2ch_rotation
    normal = axis_rotation(axis, sign * turn) @ e_z
    # e_z is orthogonal to the apex-mitral axis, so the turned normal is too
    normal = _unit(normal - np.dot(normal, axis) * axis, "view normal")
    return _pose_from_axes(np.cross(axis, normal), axis, normal, mitral, view)


def place_in_image(
    pose: PlanePose,
    image_size: int,
    field_of_view_mm: float = DEFAULT_FIELD_OF_VIEW_MM,
    anchor: tuple[float, float] = DEFAULT_IMAGE_ANCHOR,
) -> PlanePose:
    """
    Turn a millimetre pose into a pixel pose for a square image.

    The frame origin lands at `anchor * image_size` and `field_of_view_mm`
    of anatomy span the image, so plane-frame x and y are pixel coordinates
    (x = column, y = row, rows growing away from the apex side).

    Args:
        pose: Pose in millimetres (any scale)
        image_size: Image width and height in pixels
        field_of_view_mm: Anatomy spanned by the image at pose scale 1
        anchor: Fractional image position of the frame origin

    Returns:
        Pose whose output is in pixels
    """
    if field_of_view_mm <= 0:
        raise ValueError(f"field_of_view_mm must be positive, got {field_of_view_mm}")
    pixels_per_mm = image_size / field_of_view_mm
    total_scale = pose.scale * pixels_per_mm
    anchor_px = np.array([anchor[0] * image_size, anchor[1] * image_size, 0.0])
    return PlanePose(
        rotation=pose.rotation,
        translation=pose.translation + anchor_px / total_scale,
        scale=total_scale,
        view=pose.view,
    )


def dihedral_angle(a: PlanePose, b: PlanePose) -> float:
    """Angle between two image planes in degrees, in [0, 90]."""
    cosine = abs(float(np.dot(a.normal, b.normal)))
    return float(np.degrees(np.arccos(min(1.0, cosine))))
