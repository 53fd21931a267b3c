"""
Procedural four-chamber phantom.

Each chamber is an ellipsoid obtained by subdividing an icosahedron and
scaling it along the model axes. Ventricles hang apex-down (-z) on either
side of a septal gap at x = 0 (LV on +x), atria sit above them across a
valve-plane gap, and -y points anteriorly. Landmarks are emitted from the
construction parameters, so the phantom needs no landmark detection.

A seed perturbs every semi-axis by up to 15% and the chamber positions by a
few millimetres, standing in for patient variation.

Author: EchoViews Contributors
License: MIT
"""

import math

import numpy as np

from meshing.mesh import AnatomicalMesh, StructureId

# Semi-axes (x, y, z) in millimetres
BASE_RADII: dict[StructureId, tuple[float, float, float]] = {
    StructureId.LV: (20.0, 20.0, 38.0),
    StructureId.RV: (15.0, 18.0, 32.0),
    StructureId.LA: (17.0, 17.0, 16.0),
    StructureId.RA: (16.0, 16.0, 17.0),
}
SEPTAL_GAP_MM = 4.0
VALVE_GAP_MM = 6.0
MAX_AXIS_PERTURBATION = 0.15
MAX_OFFSET_MM = 2.0


def icosahedron() -> tuple[np.ndarray, np.ndarray]:
    """
    Unit icosahedron with vertices on both poles.

    Returns:
        (12, 3) vertices and (20, 3) outward-oriented faces
    """
    h = 1.0 / math.sqrt(5.0)
    r = 2.0 / math.sqrt(5.0)
    points = [(0.0, 0.0, 1.0)]
    for k in range(5):
        angle = 2.0 * math.pi * k / 5.0
        points.append((r * math.cos(angle), r * math.sin(angle), h))
    for k in range(5):
        angle = 2.0 * math.pi * k / 5.0 + math.pi / 5.0
        points.append((r * math.cos(angle), r * math.sin(angle), -h))
    points.append((0.0, 0.0, -1.0))

    faces = []
    for k in range(5):
        upper, upper_next = 1 + k, 1 + (k + 1) % 5
        lower, lower_next = 6 + k, 6 + (k + 1) % 5
        faces.append((0, upper, upper_next))
        faces.append((upper, lower, upper_next))
        faces.append((upper_next, lower, lower_next))
        faces.append((11, lower_next, lower))

    vertices = np.array(points, dtype=np.float64)
    return vertices, _orient_outward(vertices, np.array(faces, dtype=np.int64))


def _orient_outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    tri = vertices[faces]
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    inward = np.einsum("ij,ij->i", normals, tri.mean(axis=1)) < 0
    faces = faces.copy()
    faces[inward] = faces[inward][:, [0, 2, 1]]
    return faces


def icosphere(detail: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Unit sphere by repeated 4-to-1 subdivision of the icosahedron.

    Args:
        detail: Number of subdivisions (0 returns the icosahedron)

    Returns:
        Vertices (10 * 4**detail + 2, 3) and outward faces (20 * 4**detail, 3)
    """
    vertices, faces = icosahedron()
    points = [tuple(p) for p in vertices]

    for _ in range(detail):
        midpoint_cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint_cache:
                m = (np.asarray(points[a]) + np.asarray(points[b])) / 2.0
                m = m / np.linalg.norm(m)
                midpoint_cache[key] = len(points)
                points.append(tuple(m))
            return midpoint_cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = np.array(refined, dtype=np.int64)

    return np.array(points, dtype=np.float64), faces


def generate_phantom(seed: int, detail: int = 2) -> AnatomicalMesh:
    """
    Build a seeded four-chamber phantom.

    Args:
        seed: Random seed; equal seeds give bit-identical meshes
        detail: Icosphere subdivision level per chamber (>= 1)

    Returns:
        Validated AnatomicalMesh with mesh_id 'phantom_<seed>'

    Raises:
        ValueError: If detail < 1
    """
    if detail < 1:
        raise ValueError(f"detail must be >= 1, got {detail}")

    rng = np.random.default_rng(seed)
    radii = {
        s: np.array(BASE_RADII[s])
        * (1.0 + rng.uniform(-MAX_AXIS_PERTURBATION, MAX_AXIS_PERTURBATION, size=3))
        for s in StructureId
    }
    offsets = {s: rng.uniform(-MAX_OFFSET_MM, MAX_OFFSET_MM, size=2) for s in StructureId}

    half_gap = SEPTAL_GAP_MM / 2.0
    centers: dict[StructureId, np.ndarray] = {}
    centers[StructureId.LV] = np.array([half_gap + radii[StructureId.LV][0], offsets[StructureId.LV][1], 0.0])
    lv_top = radii[StructureId.LV][2]
    # RV base level with the LV base, apex higher than the LV apex
    centers[StructureId.RV] = np.array(
        [
            -(half_gap + radii[StructureId.RV][0]),
            offsets[StructureId.RV][1],
            lv_top - radii[StructureId.RV][2] + offsets[StructureId.RV][0],
        ]
    )
    ventricle_top = max(
        centers[s][2] + radii[s][2] for s in (StructureId.LV, StructureId.RV)
    )
    for atrium, side in ((StructureId.LA, 1.0), (StructureId.RA, -1.0)):
        centers[atrium] = np.array(
            [
                side * (half_gap + radii[atrium][0]),
                offsets[atrium][1],
                ventricle_top + VALVE_GAP_MM + radii[atrium][2],
            ]
        )

    sphere, sphere_faces = icosphere(detail)
    blocks, face_blocks, labels = [], [], []
    for structure in StructureId:
        offset = sum(b.shape[0] for b in blocks)
        blocks.append(sphere * radii[structure] + centers[structure])
        face_blocks.append(sphere_faces + offset)
        labels.append(np.full(sphere.shape[0], int(structure), dtype=np.int8))

    def top(s: StructureId) -> np.ndarray:
        return centers[s] + np.array([0.0, 0.0, radii[s][2]])

    def bottom(s: StructureId) -> np.ndarray:
        return centers[s] - np.array([0.0, 0.0, radii[s][2]])

    lv_radii = radii[StructureId.LV]
    landmarks = {
        "lv_apex": bottom(StructureId.LV),
        "mitral_center": (top(StructureId.LV) + bottom(StructureId.LA)) / 2.0,
        "tricuspid_center": (top(StructureId.RV) + bottom(StructureId.RA)) / 2.0,
        "aortic_valve_center": top(StructureId.LV)
        + np.array([-0.45 * lv_radii[0], -0.55 * lv_radii[1], -0.1 * lv_radii[2]]),
    }

    mesh = AnatomicalMesh(
        vertices=np.concatenate(blocks),
        faces=np.concatenate(face_blocks),
        structure_of_vertex=np.concatenate(labels),
        landmarks=landmarks,
        mesh_id=f"phantom_{seed:04d}",
    )
    return mesh.validate()
