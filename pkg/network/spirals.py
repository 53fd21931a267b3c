"""
Spiral orderings of mesh vertices.

The spiral of vertex i starts with i, continues with its one-ring in face
orientation order beginning at the lowest-index neighbour, and then walks
outward ring by ring: for every vertex of the previous ring (in order), its
own oriented one-ring contributes the vertices not seen yet. Spirals are
cut to length l or padded with a sentinel index equal to the vertex count.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from utils.errors import SpiralError


@dataclass(frozen=True, eq=False)
class SpiralIndex:
    """
    Attributes:
        indices: (N, l) int64; row i starts with i, padding uses `pad_index`
        pad_index: Sentinel index (= N) selecting a zero feature row
    """

    indices: np.ndarray
    pad_index: int

    @property
    def n_vertices(self) -> int:
        return int(self.indices.shape[0])

    @property
    def length(self) -> int:
        return int(self.indices.shape[1])


def oriented_rings(faces: np.ndarray, n_vertices: int) -> list[list[int]]:
    """
    One-ring of every vertex in face orientation order.

    For each face (v, a, b) listed counter-clockwise around v, b follows a.
    The walk starts at the lowest-index neighbour.

    Raises:
        SpiralError: If a vertex lies on a boundary or is non-manifold
    """
    successor: list[dict[int, int]] = [dict() for _ in range(n_vertices)]
    for face in faces:
        for k in range(3):
            v, a, b = int(face[k]), int(face[(k + 1) % 3]), int(face[(k + 2) % 3])
            if a in successor[v]:
                raise SpiralError(f"vertex {v}: edge to {a} used twice in one orientation")
            successor[v][a] = b

    rings = []
    for v in range(n_vertices):
        following = successor[v]
        if not following:
            raise SpiralError(f"vertex {v} belongs to no face")
        if set(following) != set(following.values()):
            raise SpiralError(f"vertex {v} lies on a boundary; spirals need closed surfaces")
        start = min(following)
        ring = [start]
        current = following[start]
        while current != start:
            ring.append(current)
            current = following[current]
        if len(ring) != len(following):
            raise SpiralError(f"vertex {v} has a non-manifold neighbourhood")
        rings.append(ring)
    return rings


def build_spirals(
    adjacency: Sequence[np.ndarray], faces: np.ndarray, length: int
) -> SpiralIndex:
    """
    Build fixed-length spirals for every vertex.

    Args:
        adjacency: Per-vertex neighbour lists (build_adjacency)
        faces: (F, 3) triangles, counter-clockwise seen from outside
        length: Spiral length l >= 2

    Returns:
        SpiralIndex with (N, l) indices

    Raises:
        ValueError: If length < 2
        SpiralError: On boundary or non-manifold vertices
    """
    if length < 2:
        raise ValueError(f"spiral length must be >= 2, got {length}")
    n_vertices = len(adjacency)
    rings = oriented_rings(faces, n_vertices)

    indices = np.full((n_vertices, length), n_vertices, dtype=np.int64)
    for v in range(n_vertices):
        if sorted(rings[v]) != list(adjacency[v]):
            raise SpiralError(f"vertex {v}: face ring does not match adjacency")
        spiral = [v]
        seen = {v}
        frontier = [v]
        while len(spiral) < length and frontier:
            next_frontier = []
            for u in frontier:
                for w in rings[u]:
                    if w not in seen:
                        seen.add(w)
                        spiral.append(w)
                        next_frontier.append(w)
            frontier = next_frontier
        spiral = spiral[:length]
        indices[v, : len(spiral)] = spiral
    return SpiralIndex(indices=indices, pad_index=n_vertices)


def pad_spirals(spirals: SpiralIndex, length: int) -> SpiralIndex:
    """Extend spirals to `length` with sentinel slots only."""
    if length < spirals.length:
        raise ValueError("pad_spirals can only lengthen spirals")
    extra = np.full((spirals.n_vertices, length - spirals.length), spirals.pad_index, dtype=np.int64)
    return SpiralIndex(indices=np.hstack([spirals.indices, extra]), pad_index=spirals.pad_index)
