"""
EchoViews - View geometry modules.

Standard view frames, cutplane sampling, mesh slicing, label rasterisation
with sector masks, view markers and the inside-test reference raster.
"""

from .frames import (
    FrameAngles,
    PlanePose,
    ViewLabel,
    dihedral_angle,
    place_in_image,
    standard_frame,
    to_plane_coords,
)
from .sampling import PoseSamplingLimits, ViewSamplingLimits, sample_pose
from .slicing import polygon_area, slice_mesh
from .raster import SectorCone, apply_sector, make_sector, rasterize
from .markers import ViewMarkerSet, encode_all_markers, encode_view_markers
from .voxel_oracle import label_iou, voxel_label_image

__all__ = [
    "FrameAngles",
    "PlanePose",
    "ViewLabel",
    "dihedral_angle",
    "place_in_image",
    "standard_frame",
    "to_plane_coords",
    "PoseSamplingLimits",
    "ViewSamplingLimits",
    "sample_pose",
    "polygon_area",
    "slice_mesh",
    "SectorCone",
    "apply_sector",
    "make_sector",
    "rasterize",
    "ViewMarkerSet",
    "encode_all_markers",
    "encode_view_markers",
    "label_iou",
    "voxel_label_image",
]
