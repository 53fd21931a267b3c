"""
Synthetic view-sample generation.

For every mesh, view and sample index a cutplane is drawn around the
view's standard frame, the mesh is sliced and rasterised, a sector mask is
applied and the plane-frame vertex coordinates are stored as ground truth.

Each sample draws from its own generator seeded with
(seed, mesh index, view code, sample index), so the output does not depend
on the number of workers or on the order samples are processed in.

Author: EchoViews Contributors
License: MIT
"""

import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from dataset.sample import DatasetManifest, ViewSample, round_significant
from dataset.sample_io import write_manifest, write_sample
from meshing.mesh import AnatomicalMesh, CorrespondedMesh, topology_hash
from utils.constants import (
    DEFAULT_FIELD_OF_VIEW_MM,
    DEFAULT_IMAGE_ANCHOR,
    DEFAULT_SPLIT_FRACTIONS,
    SPLIT_NAMES,
)
from utils.errors import ConfigError
from views.frames import FrameAngles, ViewLabel, place_in_image, standard_frame, to_plane_coords
from views.raster import apply_sector, make_sector, rasterize
from views.sampling import ViewSamplingLimits, sample_pose
from views.slicing import slice_mesh

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class GenerationSettings:
    """Everything besides the meshes that determines a sample."""

    image_size: int
    seed: int
    limits: ViewSamplingLimits
    angles: FrameAngles = FrameAngles()
    field_of_view_mm: float = DEFAULT_FIELD_OF_VIEW_MM
    anchor: tuple[float, float] = DEFAULT_IMAGE_ANCHOR
    sector_mask: bool = True

    def to_dict(self) -> dict:
        return {
            "anchor": list(self.anchor),
            "field_of_view_mm": self.field_of_view_mm,
            "frame_angles": {
                "a2ch_rotation": self.angles.a2ch_rotation,
                "a5ch_tilt": self.angles.a5ch_tilt,
                "aplax_rotation": self.angles.aplax_rotation,
            },
            "sector_mask": self.sector_mask,
        }


def sample_id_for(mesh_index: int, view: ViewLabel, index: int) -> str:
    return f"m{mesh_index:03d}-{ViewLabel(view).short_name}-{index:04d}"


def generate_sample(
    mesh: AnatomicalMesh,
    mesh_index: int,
    view: ViewLabel,
    index: int,
    settings: GenerationSettings,
) -> ViewSample:
    """
    Generate one sample.

    Args:
        mesh: Corresponded mesh
        mesh_index: Position of the mesh in the dataset's mesh list
        view: Target view
        index: Sample index within (mesh, view)
        settings: Generation settings

    Returns:
        ViewSample; identical for identical arguments
    """
    rng = np.random.default_rng([settings.seed, mesh_index, int(view), index])
    frame = standard_frame(mesh, view, settings.angles)
    pose = place_in_image(
        sample_pose(frame, settings.limits[view], rng),
        settings.image_size,
        settings.field_of_view_mm,
        settings.anchor,
    )
    image = rasterize(slice_mesh(mesh, pose), settings.image_size)
    sector = make_sector(rng, settings.image_size)
    if settings.sector_mask:
        image = apply_sector(image, sector)
    return ViewSample(
        sample_id=sample_id_for(mesh_index, view, index),
        mesh_id=mesh.mesh_id,
        view=view,
        image=image,
        gt_coords=round_significant(to_plane_coords(mesh.vertices, pose)),
        pose=pose,
        sector=sector if settings.sector_mask else None,
    )


def assign_splits(
    mesh_ids: Sequence[str], fractions: Mapping[str, float], seed: int
) -> dict[str, str]:
    """
    Assign whole meshes to splits.

    val and test get round(fraction * n) meshes each, train the rest; the
    meshes are shuffled with the master seed first.

    Raises:
        ConfigError: Negative fractions, unknown split names, or fractions summing above 1
    """
    unknown = set(fractions) - set(SPLIT_NAMES)
    if unknown:
        raise ConfigError(f"unknown split(s) {sorted(unknown)}")
    if any(f < 0 for f in fractions.values()) or sum(fractions.values()) > 1.0 + 1e-9:
        raise ConfigError(f"split fractions must be non-negative and sum to 1, got {dict(fractions)}")

    n = len(mesh_ids)
    n_val = int(round(fractions.get("val", 0.0) * n))
    n_test = int(round(fractions.get("test", 0.0) * n))
    if n_val + n_test > n:
        n_test = n - n_val
    order = np.random.default_rng(seed).permutation(n)
    assignment = {}
    for rank, i in enumerate(order):
        if rank < n - n_val - n_test:
            assignment[mesh_ids[i]] = "train"
        elif rank < n - n_test:
            assignment[mesh_ids[i]] = "val"
        else:
            assignment[mesh_ids[i]] = "test"
    for split in SPLIT_NAMES:
        if split not in assignment.values():
            logger.warning("split '%s' has no meshes", split)
    return assignment


def _generate_and_write(item: tuple) -> tuple[str, str]:
    mesh, mesh_index, view, index, settings, directory = item
    sample = generate_sample(mesh, mesh_index, view, index, settings)
    write_sample(sample, directory)
    return sample.sample_id, sample.view.short_name


def generate_dataset(
    meshes: Sequence[CorrespondedMesh],
    per_view_count: int,
    limits: ViewSamplingLimits,
    seed: int,
    image_size: int,
    out_dir: PathLike,
    split_fractions: Optional[Mapping[str, float]] = None,
    workers: int = 1,
    angles: Optional[FrameAngles] = None,
    field_of_view_mm: float = DEFAULT_FIELD_OF_VIEW_MM,
    sector_mask: bool = True,
) -> DatasetManifest:
    """
    Generate and write a dataset.

    Args:
        meshes: Corresponded meshes sharing one template topology
        per_view_count: Samples per mesh and view
        limits: Per-view pose sampling limits
        seed: Master seed
        image_size: Image width and height in pixels
        out_dir: Dataset root; existing split directories are replaced
        split_fractions: Mesh fractions per split (default 0.8/0.1/0.1)
        workers: Worker processes; 1 runs in-process
        angles: Standard frame angles
        field_of_view_mm: Anatomy spanned by the image at unit zoom
        sector_mask: Apply the random sector cone to the images

    Returns:
        The manifest, also written to `out_dir/manifest.json`

    Raises:
        ConfigError: No meshes, non-positive counts or mixed topologies
        OSError: If files cannot be written
    """
    if not meshes:
        raise ConfigError("at least one mesh is required")
    if per_view_count < 1:
        raise ConfigError(f"per_view_count must be >= 1, got {per_view_count}")
    topologies = {topology_hash(m) for m in meshes}
    if len(topologies) != 1:
        raise ConfigError("meshes do not share one template topology")

    settings = GenerationSettings(
        image_size=image_size,
        seed=seed,
        limits=limits,
        angles=angles or FrameAngles(),
        field_of_view_mm=field_of_view_mm,
        sector_mask=sector_mask,
    )
    mesh_splits = assign_splits(
        [m.mesh_id for m in meshes], split_fractions or DEFAULT_SPLIT_FRACTIONS, seed
    )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for split in SPLIT_NAMES:
        if (out_dir / split).exists():
            shutil.rmtree(out_dir / split)

    items = [
        (mesh, mesh_index, view, index, settings, out_dir / mesh_splits[mesh.mesh_id])
        for mesh_index, mesh in enumerate(meshes)
        for view in ViewLabel
        for index in range(per_view_count)
    ]
    logger.info(
        "generating %d samples from %d mesh(es) with %d worker(s)", len(items), len(meshes), workers
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            written = list(executor.map(_generate_and_write, items, chunksize=4))
    else:
        written = [_generate_and_write(item) for item in items]

    splits: dict[str, list[str]] = {split: [] for split in SPLIT_NAMES}
    for item, (sample_id, _) in zip(items, written):
        splits[mesh_splits[item[0].mesh_id]].append(sample_id)

    manifest = DatasetManifest(
        template_topology_id=topologies.pop(),
        n_vertices=meshes[0].n_vertices,
        image_size=image_size,
        seed=seed,
        per_view_count=per_view_count,
        sampling_limits=limits.to_dict(),
        mesh_splits=mesh_splits,
        splits=splits,
        settings=settings.to_dict(),
    ).validate()
    write_manifest(manifest, out_dir)
    logger.info(
        "dataset written to %s: %s",
        out_dir,
        ", ".join(f"{s}={len(ids)}" for s, ids in splits.items()),
    )
    return manifest
