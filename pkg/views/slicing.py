"""
Mesh-plane intersection.

Vertices are moved into the plane frame, every triangle whose vertices lie
on both sides of z = 0 contributes one segment, and segments are chained
into closed loops per structure. Segment end points are keyed by the mesh
edge they lie on, so two faces sharing a crossing edge share the exact same
point and chaining is a walk on a graph of degree two.

Vertices with |z| below a tiny threshold are pushed to +threshold first;
afterwards no vertex lies on the plane and every crossing is proper.

Author: EchoViews Contributors
License: MIT
"""

import logging

import numpy as np

from meshing.mesh import AnatomicalMesh, StructureId
from utils.constants import ON_PLANE_NUDGE
from views.frames import PlanePose, to_plane_coords

logger = logging.getLogger(__name__)

Polygons = dict[StructureId, list[np.ndarray]]

MIN_POLYGON_AREA = 1e-12


def polygon_area(polygon: np.ndarray) -> float:
    """Unsigned shoelace area of a closed (k, 2) polygon (closing edge implicit)."""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def nudge_on_plane(coords: np.ndarray, threshold: float = ON_PLANE_NUDGE) -> np.ndarray:
    """Copy of `coords` with |z| < threshold replaced by +threshold."""
    coords = np.array(coords, dtype=np.float64, copy=True)
    on_plane = np.abs(coords[:, 2]) < threshold
    coords[on_plane, 2] = threshold
    return coords


def slice_triangles(coords: np.ndarray, faces: np.ndarray) -> list[np.ndarray]:
    """
    Intersect a closed triangle surface with the plane z = 0.

    Args:
        coords: (N, 3) plane-frame vertex coordinates
        faces: (F, 3) triangles of one closed surface

    Returns:
        Closed loops as (k, 2) arrays of (x, y), k >= 3, without a repeated
        end point. Loops with zero area are dropped.
    """
    coords = nudge_on_plane(coords)
    above = coords[faces, 2] > 0.0
    crossing = faces[np.any(above, axis=1) & ~np.all(above, axis=1)]
    if crossing.size == 0:
        return []

    points: dict[tuple[int, int], np.ndarray] = {}
    links: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for face in crossing:
        keys = []
        for i in range(3):
            a, b = int(face[i]), int(face[(i + 1) % 3])
            za, zb = coords[a, 2], coords[b, 2]
            if (za > 0.0) == (zb > 0.0):
                continue
            key = (a, b) if a < b else (b, a)
            if key not in points:
                pa, pb = coords[key[0]], coords[key[1]]
                t = pa[2] / (pa[2] - pb[2])
                points[key] = pa[:2] + t * (pb[:2] - pa[:2])
            keys.append(key)
        first, second = keys
        links.setdefault(first, []).append(second)
        links.setdefault(second, []).append(first)

    loops = []
    visited: set[tuple[int, int]] = set()
    for start in sorted(links):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        previous, current = None, start
        while True:
            options = [k for k in links[current] if k != previous]
            nxt = options[0] if options else links[current][0]
            if nxt == start or nxt in visited:
                break
            loop.append(nxt)
            visited.add(nxt)
            previous, current = current, nxt
        polygon = np.array([points[k] for k in loop])
        if len(loop) >= 3 and polygon_area(polygon) > MIN_POLYGON_AREA:
            loops.append(polygon)
    return loops


def slice_mesh(mesh: AnatomicalMesh, pose: PlanePose) -> Polygons:
    """
    Cut `mesh` with the image plane of `pose`.

    Args:
        mesh: Valid mesh
        pose: Pose in pixel units (see place_in_image)

    Returns:
        Structure -> list of closed polygons in pixel coordinates; structures
        the plane misses are absent, so no intersection gives an empty dict
    """
    coords = to_plane_coords(mesh.vertices, pose)
    face_structures = mesh.face_structures()
    polygons: Polygons = {}
    for structure in StructureId:
        loops = slice_triangles(coords, mesh.faces[face_structures == int(structure)])
        if loops:
            polygons[structure] = loops
    logger.debug(
        "sliced %s (%s): %d polygon(s)",
        mesh.mesh_id,
        pose.view.short_name,
        sum(len(p) for p in polygons.values()),
    )
    return polygons
