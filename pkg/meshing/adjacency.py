"""
Vertex adjacency of an AnatomicalMesh.

Faces never span two structures, so the adjacency built from the faces is
block-diagonal across LV, RV, LA and RA: one adjacency per structure,
concatenated.

Author: EchoViews Contributors
License: MIT
"""

import numpy as np
from scipy import sparse

from meshing.mesh import AnatomicalMesh, unique_edges


def adjacency_matrix(mesh: AnatomicalMesh) -> sparse.csr_matrix:
    """Symmetric (N, N) 0/1 adjacency matrix with sorted column indices."""
    edges = unique_edges(mesh.faces)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(rows.size, dtype=np.int8)
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(mesh.n_vertices, mesh.n_vertices))
    matrix = matrix.tocsr()
    matrix.sort_indices()
    return matrix


def build_adjacency(mesh: AnatomicalMesh) -> list[np.ndarray]:
    """
    Per-vertex neighbour lists.

    Args:
        mesh: Valid mesh

    Returns:
        List of length N; entry i holds the neighbours of vertex i in
        ascending order, all within the structure of i
    """
    matrix = adjacency_matrix(mesh)
    return [
        matrix.indices[matrix.indptr[i] : matrix.indptr[i + 1]].astype(np.int64)
        for i in range(mesh.n_vertices)
    ]
