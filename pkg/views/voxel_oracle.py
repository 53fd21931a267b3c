"""
Brute-force label image by point-in-solid tests.

For every pixel centre (x, y, 0) of the image plane and every structure, a
ray is cast along +z and the triangles it crosses are counted; an odd count
means the point lies inside the closed chamber. This uses no slicing or
polygon code at all and serves as an independent reference for
`slice_mesh` followed by `rasterize`.

Author: EchoViews Contributors
License: MIT
"""

import math

import numpy as np

from meshing.mesh import AnatomicalMesh, StructureId
from utils.acceleration import kernel
from utils.constants import BACKGROUND_CODE, DRAW_ORDER
from views.frames import PlanePose, to_plane_coords


@kernel
def _column_parity(triangles: np.ndarray, image_size: int) -> np.ndarray:
    """Parity of +z ray crossings at each pixel centre for (F, 3, 3) triangles."""
    counts = np.zeros((image_size, image_size), dtype=np.int32)
    for f in range(triangles.shape[0]):
        ax, ay, az = triangles[f, 0, 0], triangles[f, 0, 1], triangles[f, 0, 2]
        bx, by, bz = triangles[f, 1, 0], triangles[f, 1, 1], triangles[f, 1, 2]
        cx, cy, cz = triangles[f, 2, 0], triangles[f, 2, 1], triangles[f, 2, 2]
        if az <= 0.0 and bz <= 0.0 and cz <= 0.0:
            continue
        det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
        if det == 0.0:
            continue
        c_start = max(0, int(math.floor(min(ax, bx, cx) - 0.5)))
        c_stop = min(image_size - 1, int(math.ceil(max(ax, bx, cx) - 0.5)))
        r_start = max(0, int(math.floor(min(ay, by, cy) - 0.5)))
        r_stop = min(image_size - 1, int(math.ceil(max(ay, by, cy) - 0.5)))
        for r in range(r_start, r_stop + 1):
            py = r + 0.5
            for c in range(c_start, c_stop + 1):
                px = c + 0.5
                w0 = ((by - cy) * (px - cx) + (cx - bx) * (py - cy)) / det
                w1 = ((cy - ay) * (px - cx) + (ax - cx) * (py - cy)) / det
                w2 = 1.0 - w0 - w1
                if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                    continue
                if w0 * az + w1 * bz + w2 * cz > 0.0:
                    counts[r, c] += 1
    return counts % 2 == 1


def structure_inside_mask(
    coords: np.ndarray, faces: np.ndarray, image_size: int
) -> np.ndarray:
    """Boolean mask of pixel centres inside the closed surface `faces`."""
    triangles = np.ascontiguousarray(coords[faces], dtype=np.float64)
    return _column_parity(triangles, int(image_size))


def voxel_label_image(mesh: AnatomicalMesh, pose: PlanePose, image_size: int) -> np.ndarray:
    """
    Label image of `mesh` cut by the image plane of `pose`, by inside tests.

    Args:
        mesh: Valid mesh
        pose: Pose in pixel units
        image_size: Width and height in pixels

    Returns:
        (image_size, image_size) uint8 image, same draw order as rasterize
    """
    coords = to_plane_coords(mesh.vertices, pose)
    face_structures = mesh.face_structures()
    image = np.full((image_size, image_size), BACKGROUND_CODE, dtype=np.uint8)
    for name in DRAW_ORDER:
        structure = StructureId[name]
        faces = mesh.faces[face_structures == int(structure)]
        image[structure_inside_mask(coords, faces, image_size)] = int(structure)
    return image


def label_iou(a: np.ndarray, b: np.ndarray) -> float:
    """
    Agreement of two label images over their foreground.

    Pixels count as intersection when both carry the same non-zero label and
    as union when either is non-zero. Two empty images give 1.
    """
    union = np.count_nonzero((a > 0) | (b > 0))
    if union == 0:
        return 1.0
    return float(np.count_nonzero((a == b) & (a > 0)) / union)
