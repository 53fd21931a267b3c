"""
Shortest-edge-collapse downsampling.

Each structure is simplified on its own: edges are collapsed to their
midpoint in order of increasing length until the structure's share of the
vertex budget is reached. A collapse is rejected when it would

- break manifoldness (the link condition: the two endpoints share exactly
  the two opposite vertices),
- leave a vertex with fewer than three neighbours, or
- flip or degenerate any surviving face around the collapsed edge.

Every accepted collapse removes one vertex, three edges and two faces, so
the Euler characteristic of each closed chamber is preserved.

Author: EchoViews Contributors
License: MIT
"""

import heapq
import logging
from typing import Optional

import numpy as np

from meshing.mesh import AnatomicalMesh, StructureId
from utils.errors import DownsampleError

logger = logging.getLogger(__name__)

MIN_STRUCTURE_VERTICES = 4
# Minimum cosine between a face normal before and after a collapse
NORMAL_COSINE_LIMIT = 0.0


def structure_budgets(mesh: AnatomicalMesh, target_count: int) -> dict[StructureId, int]:
    """
    Split `target_count` over the structures in proportion to their vertex share.

    Uses largest remainders so the budgets sum to `target_count` exactly.
    """
    counts = {s: int(np.sum(mesh.structure_of_vertex == int(s))) for s in StructureId}
    total = sum(counts.values())
    exact = {s: target_count * counts[s] / total for s in StructureId}
    budgets = {s: int(np.floor(exact[s])) for s in StructureId}
    remainder = target_count - sum(budgets.values())
    by_fraction = sorted(StructureId, key=lambda s: (-(exact[s] - budgets[s]), int(s)))
    for s in by_fraction[:remainder]:
        budgets[s] += 1
    return budgets


class _EdgeCollapser:
    """Mutable working copy of one closed structure surface."""

    def __init__(self, positions: np.ndarray, faces: np.ndarray):
        self.positions = positions.copy()
        self.faces = [list(f) for f in faces]
        self.face_alive = [True] * len(self.faces)
        self.vertex_alive = [True] * len(positions)
        self.vertex_faces: list[set[int]] = [set() for _ in range(len(positions))]
        for f, face in enumerate(self.faces):
            for v in face:
                self.vertex_faces[v].add(f)
        self.n_alive = len(positions)
        self.heap: list[tuple[float, int, int]] = []
        for a, b in self._all_edges():
            self._push(a, b)

    def _all_edges(self) -> list[tuple[int, int]]:
        edges = set()
        for face in self.faces:
            for i in range(3):
                a, b = face[i], face[(i + 1) % 3]
                edges.add((min(a, b), max(a, b)))
        return sorted(edges)

    def _length(self, a: int, b: int) -> float:
        return float(np.linalg.norm(self.positions[a] - self.positions[b]))

    def _push(self, a: int, b: int) -> None:
        a, b = min(a, b), max(a, b)
        heapq.heappush(self.heap, (self._length(a, b), a, b))

    def neighbors(self, v: int) -> set[int]:
        result: set[int] = set()
        for f in self.vertex_faces[v]:
            result.update(self.faces[f])
        result.discard(v)
        return result

    def _normal(self, face: list[int], moved: Optional[dict[int, np.ndarray]] = None) -> np.ndarray:
        p = [moved[v] if moved and v in moved else self.positions[v] for v in face]
        return np.cross(p[1] - p[0], p[2] - p[0])

    def _can_collapse(self, a: int, b: int, target: np.ndarray) -> bool:
        shared = self.vertex_faces[a] & self.vertex_faces[b]
        if len(shared) != 2:
            return False
        neighbors_a, neighbors_b = self.neighbors(a), self.neighbors(b)
        opposite = neighbors_a & neighbors_b
        if len(opposite) != 2:
            return False
        if any(len(self.neighbors(c)) <= 3 for c in opposite):
            return False
        if len(neighbors_a | neighbors_b) - 2 < 3:
            return False

        moved = {a: target, b: target}
        for f in (self.vertex_faces[a] | self.vertex_faces[b]) - shared:
            before = self._normal(self.faces[f])
            after = self._normal(self.faces[f], moved)
            norm_before, norm_after = np.linalg.norm(before), np.linalg.norm(after)
            if norm_after <= 1e-12 * max(norm_before, 1e-300):
                return False
            if np.dot(before, after) <= NORMAL_COSINE_LIMIT * norm_before * norm_after:
                return False
        return True

    def _collapse(self, a: int, b: int, target: np.ndarray) -> None:
        shared = self.vertex_faces[a] & self.vertex_faces[b]
        for f in shared:
            self.face_alive[f] = False
            for v in self.faces[f]:
                self.vertex_faces[v].discard(f)
        for f in self.vertex_faces[b]:
            self.faces[f] = [a if v == b else v for v in self.faces[f]]
            self.vertex_faces[a].add(f)
        self.vertex_faces[b] = set()
        self.vertex_alive[b] = False
        self.positions[a] = target
        self.n_alive -= 1
        for n in self.neighbors(a):
            self._push(a, n)

    def run(self, target_count: int) -> None:
        while self.n_alive > target_count and self.heap:
            length, a, b = heapq.heappop(self.heap)
            if not (self.vertex_alive[a] and self.vertex_alive[b]):
                continue
            if abs(self._length(a, b) - length) > 1e-12:
                continue  # stale entry
            target = (self.positions[a] + self.positions[b]) / 2.0
            if self._can_collapse(a, b, target):
                self._collapse(a, b, target)

    def result(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Surviving vertex ids (ascending), their positions, and faces in local ids."""
        keep = np.flatnonzero(self.vertex_alive)
        remap = -np.ones(len(self.vertex_alive), dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        faces = np.array(
            [self.faces[f] for f in range(len(self.faces)) if self.face_alive[f]], dtype=np.int64
        )
        return keep, self.positions[keep], remap[faces]


def downsample(mesh: AnatomicalMesh, target_count: int) -> AnatomicalMesh:
    """
    Reduce the mesh to about `target_count` vertices.

    Args:
        mesh: Valid mesh
        target_count: Total vertex budget; split over structures in
            proportion to their current vertex share

    Returns:
        Validated mesh with the surviving vertices in their original
        relative order; landmarks unchanged

    Raises:
        DownsampleError: If the target exceeds the current count or leaves a
            structure with fewer than 4 vertices
    """
    if target_count > mesh.n_vertices:
        raise DownsampleError(
            f"target {target_count} exceeds current vertex count {mesh.n_vertices}"
        )
    if target_count == mesh.n_vertices:
        return mesh

    budgets = structure_budgets(mesh, target_count)
    too_small = [s.name for s, b in budgets.items() if b < MIN_STRUCTURE_VERTICES]
    if too_small:
        raise DownsampleError(
            f"target {target_count} leaves fewer than {MIN_STRUCTURE_VERTICES} vertices "
            f"in {', '.join(too_small)}; structures cannot stay closed"
        )

    kept_ids, kept_positions, kept_faces = [], [], []
    face_structures = mesh.face_structures()
    for structure in StructureId:
        ids = mesh.structure_vertices(structure)
        local = -np.ones(mesh.n_vertices, dtype=np.int64)
        local[ids] = np.arange(ids.size)
        faces = local[mesh.faces[face_structures == int(structure)]]

        collapser = _EdgeCollapser(mesh.vertices[ids], faces)
        collapser.run(budgets[structure])
        keep, positions, new_faces = collapser.result()
        if keep.size > budgets[structure]:
            logger.warning(
                "%s: stopped at %d vertices (budget %d), no valid collapse left",
                structure.name,
                keep.size,
                budgets[structure],
            )
        kept_ids.append(ids[keep])
        kept_positions.append(positions)
        kept_faces.append(ids[keep][new_faces])

    survivors = np.concatenate(kept_ids)
    positions = np.concatenate(kept_positions)
    order = np.argsort(survivors, kind="stable")
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[survivors[order]] = np.arange(survivors.size)

    result = AnatomicalMesh(
        vertices=positions[order],
        faces=remap[np.concatenate(kept_faces)],
        structure_of_vertex=mesh.structure_of_vertex[survivors[order]],
        landmarks=mesh.landmarks,
        mesh_id=mesh.mesh_id,
    )
    logger.info("downsampled %s: %d -> %d vertices", mesh.mesh_id, mesh.n_vertices, result.n_vertices)
    return result.validate()
