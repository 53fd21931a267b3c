"""
Template correspondence.

Every subject mesh is re-sampled on the template topology: template vertex i
takes the position of the closest subject vertex of the same structure. The
result shares faces, structure labels and vertex count with the template, so
one network output layout fits every patient.

Meshes are expected to be registered already. An optional centroid and
scale pre-alignment may be enabled for matching only; the returned positions
are always the subject's own.

Author: EchoViews Contributors
License: MIT
"""

import logging
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from meshing.mesh import AnatomicalMesh, CorrespondedMesh, StructureId, topology_hash
from meshing.simplify import downsample
from utils.errors import CorrespondenceError

logger = logging.getLogger(__name__)

# Template vertices per distance block
CHUNK_SIZE = 2048


def nearest_vertices(queries: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """
    Index of the closest candidate for every query point.

    Ties go to the lowest candidate index (argmin returns the first minimum).

    Args:
        queries: (M, 3) points
        candidates: (K, 3) points, K >= 1

    Returns:
        (M,) int64 indices into `candidates`
    """
    result = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], CHUNK_SIZE):
        block = cdist(queries[start : start + CHUNK_SIZE], candidates, metric="sqeuclidean")
        result[start : start + CHUNK_SIZE] = np.argmin(block, axis=1)
    return result


def _normalizer(points: np.ndarray) -> tuple[np.ndarray, float]:
    centroid = points.mean(axis=0)
    scale = float(np.sqrt(np.mean(np.sum((points - centroid) ** 2, axis=1))))
    return centroid, scale if scale > 0 else 1.0


def establish_correspondence(
    template: AnatomicalMesh, subject: AnatomicalMesh, rigid_prealign: bool = False
) -> CorrespondedMesh:
    """
    Re-sample `subject` on the topology of `template`.

    Args:
        template: Valid template mesh (usually already downsampled)
        subject: Valid subject mesh, registered to the template
        rigid_prealign: Match after removing centroid and RMS scale of both
            meshes per structure

    Returns:
        CorrespondedMesh with template faces and labels, the subject's
        landmarks and mesh_id

    Raises:
        CorrespondenceError: If a template structure has no subject vertices
    """
    vertices = np.empty_like(template.vertices)
    for structure in StructureId:
        template_ids = template.structure_vertices(structure)
        subject_ids = subject.structure_vertices(structure)
        if subject_ids.size == 0:
            raise CorrespondenceError(
                f"structure {structure.name} missing in subject '{subject.mesh_id}'"
            )
        queries = template.vertices[template_ids]
        candidates = subject.vertices[subject_ids]
        if rigid_prealign:
            t_center, t_scale = _normalizer(queries)
            s_center, s_scale = _normalizer(candidates)
            queries = (queries - t_center) / t_scale
            candidates = (candidates - s_center) / s_scale
        vertices[template_ids] = subject.vertices[subject_ids[nearest_vertices(queries, candidates)]]

    logger.debug("corresponded %s to template %s", subject.mesh_id, template.mesh_id)
    return CorrespondedMesh(
        vertices=vertices,
        faces=template.faces,
        structure_of_vertex=template.structure_of_vertex,
        landmarks=subject.landmarks,
        mesh_id=subject.mesh_id,
        template_topology_id=topology_hash(template),
    )


def prepare_template_set(
    meshes: Sequence[AnatomicalMesh],
    template_vertices: int,
    template_index: int = 0,
    rigid_prealign: bool = False,
) -> tuple[AnatomicalMesh, list[CorrespondedMesh]]:
    """
    Downsample one mesh into the template and correspond every mesh to it.

    Args:
        meshes: Valid meshes, at least one
        template_vertices: Vertex budget of the template (capped at the
            source mesh's count)
        template_index: Which mesh becomes the template
        rigid_prealign: Passed on to establish_correspondence

    Returns:
        (template, corresponded meshes in input order)
    """
    if not meshes:
        raise CorrespondenceError("no meshes to prepare")
    source = meshes[template_index]
    template = downsample(source, min(template_vertices, source.n_vertices))
    template = template.with_vertices(template.vertices, mesh_id="template")
    corresponded = [establish_correspondence(template, mesh, rigid_prealign) for mesh in meshes]
    logger.info(
        "prepared template (%d vertices) and %d corresponded mesh(es)",
        template.n_vertices,
        len(corresponded),
    )
    return template, corresponded
