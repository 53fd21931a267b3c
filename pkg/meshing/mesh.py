"""
Multi-structure triangle mesh of the four heart chambers.

`AnatomicalMesh` is the 3D model every other stage works on: vertices in
millimetres, triangle faces, a per-vertex structure label (LV, RV, LA, RA)
and four named anatomical landmarks. Instances are immutable; every
operation returns a new mesh.

Author: EchoViews Contributors
License: MIT
"""

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Optional

import numpy as np

from utils.constants import LANDMARK_BOX_MARGIN, LANDMARK_NAMES, STRUCTURE_CODES
from utils.errors import MeshValidationError


class StructureId(IntEnum):
    """Heart structure labels. Codes are stable and double as raster values."""

    LV = STRUCTURE_CODES["LV"]
    RV = STRUCTURE_CODES["RV"]
    LA = STRUCTURE_CODES["LA"]
    RA = STRUCTURE_CODES["RA"]

    @classmethod
    def from_name(cls, name: str) -> "StructureId":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown structure '{name}'") from None


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned bounding box."""

    lower: np.ndarray
    upper: np.ndarray

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, point: np.ndarray, margin: float = 0.0) -> bool:
        return bool(np.all(point >= self.lower - margin) and np.all(point <= self.upper + margin))


@dataclass(frozen=True, eq=False)
class AnatomicalMesh:
    """
    Four-chamber triangle mesh with landmarks.

    Attributes:
        vertices: (N, 3) float64 positions in millimetres
        faces: (F, 3) int64 vertex indices, counter-clockwise seen from outside
        structure_of_vertex: (N,) int8 structure codes (see StructureId)
        landmarks: name -> (3,) position, names from LANDMARK_NAMES
        mesh_id: identifier carried into dataset samples
    """

    vertices: np.ndarray
    faces: np.ndarray
    structure_of_vertex: np.ndarray
    landmarks: Mapping[str, np.ndarray]
    mesh_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", _frozen(np.asarray(self.vertices, dtype=np.float64)))
        object.__setattr__(self, "faces", _frozen(np.asarray(self.faces, dtype=np.int64)))
        object.__setattr__(
            self, "structure_of_vertex", _frozen(np.asarray(self.structure_of_vertex, dtype=np.int8))
        )
        object.__setattr__(
            self,
            "landmarks",
            {name: _frozen(np.asarray(p, dtype=np.float64)) for name, p in self.landmarks.items()},
        )

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.faces.shape[0])

    def face_structures(self) -> np.ndarray:
        """Structure code of each face (taken from its first vertex)."""
        return self.structure_of_vertex[self.faces[:, 0]]

    def structure_faces(self, structure: StructureId) -> np.ndarray:
        return self.faces[self.face_structures() == int(structure)]

    def structure_vertices(self, structure: StructureId) -> np.ndarray:
        """Indices of the vertices labelled `structure`, ascending."""
        return np.flatnonzero(self.structure_of_vertex == int(structure))

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "AnatomicalMesh":
        """
        Apply the rigid motion v -> rotation @ v + translation.

        Args:
            rotation: (3, 3) rotation matrix
            translation: (3,) offset in millimetres

        Returns:
            New mesh with moved vertices and landmarks, same topology
        """
        rotation = np.asarray(rotation, dtype=np.float64)
        translation = np.asarray(translation, dtype=np.float64)
        return AnatomicalMesh(
            vertices=self.vertices @ rotation.T + translation,
            faces=self.faces,
            structure_of_vertex=self.structure_of_vertex,
            landmarks={k: rotation @ p + translation for k, p in self.landmarks.items()},
            mesh_id=self.mesh_id,
        )

    def with_vertices(self, vertices: np.ndarray, mesh_id: Optional[str] = None) -> "AnatomicalMesh":
        return AnatomicalMesh(
            vertices=vertices,
            faces=self.faces,
            structure_of_vertex=self.structure_of_vertex,
            landmarks=self.landmarks,
            mesh_id=self.mesh_id if mesh_id is None else mesh_id,
        )

    def validate(self) -> "AnatomicalMesh":
        """Check all invariants; returns self so constructors can chain."""
        validate_mesh(self)
        return self

    def __repr__(self) -> str:
        return (
            f"AnatomicalMesh(mesh_id='{self.mesh_id}', vertices={self.n_vertices}, "
            f"faces={self.n_faces})"
        )


@dataclass(frozen=True, eq=False)
class CorrespondedMesh(AnatomicalMesh):
    """
    Subject mesh re-sampled on a template topology.

    Vertex i corresponds to template vertex i; faces and structure labels are
    the template's, landmarks are the subject's own.
    """

    template_topology_id: str = field(default="")

    def with_vertices(self, vertices: np.ndarray, mesh_id: Optional[str] = None) -> "CorrespondedMesh":
        return CorrespondedMesh(
            vertices=vertices,
            faces=self.faces,
            structure_of_vertex=self.structure_of_vertex,
            landmarks=self.landmarks,
            mesh_id=self.mesh_id if mesh_id is None else mesh_id,
            template_topology_id=self.template_topology_id,
        )


def mesh_bounds(mesh: AnatomicalMesh) -> Bounds:
    """Axis-aligned bounding box of all vertices."""
    return Bounds(lower=mesh.vertices.min(axis=0), upper=mesh.vertices.max(axis=0))


def topology_hash(mesh: AnatomicalMesh) -> str:
    """SHA-256 of faces and structure labels; independent of vertex positions."""
    digest = hashlib.sha256()
    digest.update(np.int64(mesh.n_vertices).tobytes())
    digest.update(np.ascontiguousarray(mesh.faces, dtype="<i8").tobytes())
    digest.update(np.ascontiguousarray(mesh.structure_of_vertex, dtype="i1").tobytes())
    return digest.hexdigest()


def directed_edges(faces: np.ndarray) -> np.ndarray:
    """(3F, 2) directed half-edges a->b of every face."""
    return np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0)


def unique_edges(faces: np.ndarray) -> np.ndarray:
    """(E, 2) undirected edges with a < b, sorted lexicographically."""
    edges = np.sort(directed_edges(faces), axis=1)
    return np.unique(edges, axis=0)


def euler_characteristic(faces: np.ndarray) -> int:
    """V - E + F of the surface spanned by `faces`."""
    n_vertices = np.unique(faces).size
    return int(n_vertices - unique_edges(faces).shape[0] + faces.shape[0])


def _check_closed_orientable(faces: np.ndarray, name: str) -> None:
    half_edges = directed_edges(faces)
    _, counts = np.unique(np.sort(half_edges, axis=1), axis=0, return_counts=True)
    if np.any(counts != 2):
        open_edges = int(np.sum(counts == 1))
        if open_edges:
            raise MeshValidationError(
                f"{name}: open surface ({open_edges} edge(s) used by a single face)"
            )
        raise MeshValidationError(f"{name}: non-manifold edge shared by more than two faces")
    _, directed_counts = np.unique(half_edges, axis=0, return_counts=True)
    if np.any(directed_counts != 1):
        raise MeshValidationError(f"{name}: inconsistent face orientation")


def validate_mesh(mesh: AnatomicalMesh) -> None:
    """
    Check the AnatomicalMesh invariants.

    Raises:
        MeshValidationError: On the first violated invariant
    """
    n = mesh.n_vertices
    vertices, faces, labels = mesh.vertices, mesh.faces, mesh.structure_of_vertex

    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise MeshValidationError(f"vertices must be (N, 3), got {vertices.shape}")
    if faces.ndim != 2 or faces.shape[1] != 3 or faces.shape[0] == 0:
        raise MeshValidationError(f"faces must be a non-empty (F, 3) array, got {faces.shape}")
    if labels.shape != (n,):
        raise MeshValidationError(f"structure labels must have shape ({n},), got {labels.shape}")
    if not np.all(np.isfinite(vertices)):
        raise MeshValidationError("vertices contain non-finite coordinates")
    if faces.min() < 0 or faces.max() >= n:
        raise MeshValidationError(f"face index out of range for {n} vertices")
    if np.any(faces[:, 0] == faces[:, 1]) or np.any(faces[:, 1] == faces[:, 2]) or np.any(
        faces[:, 0] == faces[:, 2]
    ):
        raise MeshValidationError("degenerate face with repeated vertex index")

    face_labels = labels[faces]
    if np.any(face_labels[:, 0] != face_labels[:, 1]) or np.any(face_labels[:, 0] != face_labels[:, 2]):
        raise MeshValidationError("face spans more than one structure")

    referenced = np.zeros(n, dtype=bool)
    referenced[faces.ravel()] = True
    if not referenced.all():
        raise MeshValidationError(f"{int((~referenced).sum())} vertex/vertices not used by any face")

    valid_codes = {int(s) for s in StructureId}
    present = set(np.unique(labels).tolist())
    if not present <= valid_codes:
        raise MeshValidationError(f"unknown structure codes {sorted(present - valid_codes)}")

    for structure in StructureId:
        structure_faces = faces[face_labels[:, 0] == int(structure)]
        if structure_faces.size:
            _check_closed_orientable(structure_faces, structure.name)

    missing = [s.name for s in StructureId if int(s) not in present]
    if missing:
        raise MeshValidationError(f"missing structure(s): {', '.join(missing)}")

    bounds = mesh_bounds(mesh)
    margin = LANDMARK_BOX_MARGIN * bounds.diagonal
    for name in LANDMARK_NAMES:
        if name not in mesh.landmarks:
            raise MeshValidationError(f"missing landmark '{name}'")
        point = mesh.landmarks[name]
        if point.shape != (3,) or not np.all(np.isfinite(point)):
            raise MeshValidationError(f"landmark '{name}' must be a finite 3D point")
        if not bounds.contains(point, margin):
            raise MeshValidationError(f"landmark '{name}' lies outside the mesh bounding box")
