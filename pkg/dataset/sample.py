"""
Dataset records: one generated view sample and the dataset manifest.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from meshing.mesh import StructureId
from utils.constants import COORDINATE_DIGITS, GENERATOR_VERSION, SPLIT_NAMES
from utils.errors import DatasetFormatError
from views.frames import PlanePose, ViewLabel
from views.raster import SectorCone


def round_significant(values: np.ndarray, digits: int = COORDINATE_DIGITS) -> np.ndarray:
    """Round every element to `digits` significant decimal digits."""
    flat = np.asarray(values, dtype=np.float64).ravel()
    rounded = np.array([float(f"{v:.{digits}g}") for v in flat], dtype=np.float64)
    return rounded.reshape(np.shape(values))


@dataclass(frozen=True, eq=False)
class ViewSample:
    """
    One training example.

    Attributes:
        sample_id: Unique id, '<mesh index>-<view>-<index>'
        mesh_id: Source mesh
        view: View the cutplane was sampled around
        image: (S, S) uint8 label raster, values 0..4
        gt_coords: (N, 3) plane-frame vertex coordinates in pixels
        pose: Pixel pose the sample was cut with
        sector: Sector mask applied to the image, None when masking is off
    """

    sample_id: str
    mesh_id: str
    view: ViewLabel
    image: np.ndarray
    gt_coords: np.ndarray
    pose: PlanePose
    sector: Optional[SectorCone] = None

    def __post_init__(self) -> None:
        image = np.asarray(self.image)
        coords = np.asarray(self.gt_coords, dtype=np.float64)
        if image.ndim != 2 or image.shape[0] != image.shape[1]:
            raise DatasetFormatError(f"{self.sample_id}: image must be square, got {image.shape}")
        if image.size and int(image.max()) > max(int(s) for s in StructureId):
            raise DatasetFormatError(f"{self.sample_id}: label values must be in 0..4")
        if coords.ndim != 2 or coords.shape[1] != 3 or not np.all(np.isfinite(coords)):
            raise DatasetFormatError(f"{self.sample_id}: gt_coords must be finite (N, 3)")
        object.__setattr__(self, "image", image.astype(np.uint8))
        object.__setattr__(self, "gt_coords", coords)
        object.__setattr__(self, "view", ViewLabel(self.view))

    @property
    def image_size(self) -> int:
        return int(self.image.shape[0])

    @property
    def n_vertices(self) -> int:
        return int(self.gt_coords.shape[0])


@dataclass
class DatasetManifest:
    """
    Index of a generated dataset.

    Attributes:
        template_topology_id: Topology hash shared by all meshes
        n_vertices: Template vertex count
        image_size: Image width and height in pixels
        seed: Master seed
        per_view_count: Samples per mesh and view
        sampling_limits: Per-view pose limits as written in the config
        mesh_splits: mesh_id -> split name
        splits: split name -> sample ids in generation order
        settings: Remaining generation settings (field of view, frame angles, ...)
        generator_version: Version of the sample generator
    """

    template_topology_id: str
    n_vertices: int
    image_size: int
    seed: int
    per_view_count: int
    sampling_limits: dict
    mesh_splits: dict[str, str]
    splits: dict[str, list[str]] = field(default_factory=lambda: {s: [] for s in SPLIT_NAMES})
    settings: dict = field(default_factory=dict)
    generator_version: str = GENERATOR_VERSION

    @property
    def n_samples(self) -> int:
        return sum(len(ids) for ids in self.splits.values())

    def validate(self) -> "DatasetManifest":
        """Check that splits are disjoint and partition by mesh."""
        seen: set[str] = set()
        for split, ids in self.splits.items():
            if split not in SPLIT_NAMES:
                raise DatasetFormatError(f"unknown split '{split}' in manifest")
            overlap = seen.intersection(ids)
            if overlap:
                raise DatasetFormatError(f"sample(s) listed in two splits: {sorted(overlap)[:3]}")
            seen.update(ids)
        for mesh_id, split in self.mesh_splits.items():
            if split not in SPLIT_NAMES:
                raise DatasetFormatError(f"mesh '{mesh_id}' assigned to unknown split '{split}'")
        return self

    def to_dict(self) -> dict:
        return {
            "generator_version": self.generator_version,
            "image_size": self.image_size,
            "mesh_splits": dict(self.mesh_splits),
            "n_vertices": self.n_vertices,
            "per_view_count": self.per_view_count,
            "sampling_limits": self.sampling_limits,
            "seed": self.seed,
            "settings": self.settings,
            "splits": {s: list(self.splits.get(s, [])) for s in SPLIT_NAMES},
            "template_topology_id": self.template_topology_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        try:
            return cls(
                template_topology_id=str(data["template_topology_id"]),
                n_vertices=int(data["n_vertices"]),
                image_size=int(data["image_size"]),
                seed=int(data["seed"]),
                per_view_count=int(data["per_view_count"]),
                sampling_limits=dict(data["sampling_limits"]),
                mesh_splits={str(k): str(v) for k, v in data["mesh_splits"].items()},
                splits={str(k): [str(i) for i in v] for k, v in data["splits"].items()},
                settings=dict(data.get("settings", {})),
                generator_version=str(data["generator_version"]),
            ).validate()
        except (KeyError, TypeError, ValueError) as e:
            raise DatasetFormatError(f"malformed manifest: {e}") from None
