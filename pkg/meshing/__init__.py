"""
EchoViews - Mesh modules.

Four-chamber triangle meshes: representation and validation, OBJ I/O, the
procedural phantom, adjacency, downsampling and template correspondence.
"""

from .mesh import AnatomicalMesh, Bounds, CorrespondedMesh, StructureId, mesh_bounds, topology_hash
from .mesh_io import load_mesh, save_mesh
from .phantom import generate_phantom
from .adjacency import build_adjacency
from .simplify import downsample
from .correspondence import establish_correspondence, prepare_template_set

__all__ = [
    "AnatomicalMesh",
    "Bounds",
    "CorrespondedMesh",
    "StructureId",
    "mesh_bounds",
    "topology_hash",
    "load_mesh",
    "save_mesh",
    "generate_phantom",
    "build_adjacency",
    "downsample",
    "establish_correspondence",
    "prepare_template_set",
]
