"""
Multi-label rasterisation and ultrasound sector masks.

Polygons are filled with the even-odd rule sampled at pixel centres: pixel
(row r, column c) is inside when a ray from (c + 0.5, r + 0.5) crosses the
polygon boundary an odd number of times. Structures are painted in the
fixed order RA, LA, RV, LV, so LV wins where slices overlap.

Author: EchoViews Contributors
License: MIT
"""

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from meshing.mesh import StructureId
from utils.acceleration import kernel
from utils.constants import (
    BACKGROUND_CODE,
    DRAW_ORDER,
    SECTOR_APEX_BAND,
    SECTOR_APEX_LATERAL,
    SECTOR_HALF_ANGLE_RANGE,
    SECTOR_MAX_DEPTH_RANGE,
    SECTOR_MIN_DEPTH_RANGE,
)

MIN_IMAGE_SIZE = 16


@kernel
def _even_odd_fill(edges: np.ndarray, image_size: int) -> np.ndarray:
    """Even-odd mask of the edge set `edges` rows (x0, y0, x1, y1)."""
    toggles = np.zeros((image_size, image_size + 1), dtype=np.int32)
    for e in range(edges.shape[0]):
        x0, y0, x1, y1 = edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3]
        if y0 == y1:
            continue
        low = min(y0, y1)
        high = max(y0, y1)
        # rows whose centre y = r + 0.5 satisfies low <= y < high
        r_start = max(0, int(math.ceil(low - 0.5)))
        r_stop = min(image_size, int(math.ceil(high - 0.5)))
        for r in range(r_start, r_stop):
            y = r + 0.5
            x = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            k = int(math.ceil(x - 0.5))
            if k < 0:
                k = 0
            if k > image_size:
                k = image_size
            toggles[r, k] += 1
    mask = np.zeros((image_size, image_size), dtype=np.bool_)
    for r in range(image_size):
        parity = 0
        for c in range(image_size):
            parity += toggles[r, c]
            mask[r, c] = parity % 2 == 1
    return mask


def polygon_edges(polygons: Sequence[np.ndarray]) -> np.ndarray:
    """(E, 4) closed-polygon edges (x0, y0, x1, y1) of all `polygons`."""
    blocks = [
        np.hstack([poly, np.roll(poly, -1, axis=0)]) for poly in polygons if len(poly) >= 2
    ]
    if not blocks:
        return np.zeros((0, 4), dtype=np.float64)
    return np.ascontiguousarray(np.vstack(blocks), dtype=np.float64)


def fill_polygons(polygons: Sequence[np.ndarray], image_size: int) -> np.ndarray:
    """Boolean even-odd mask of a set of polygons sampled at pixel centres."""
    return _even_odd_fill(polygon_edges(polygons), int(image_size))


def rasterize(polygons: Mapping[StructureId, Sequence[np.ndarray]], image_size: int) -> np.ndarray:
    """
    Paint per-structure polygons into a label image.

    Args:
        polygons: Structure -> closed polygons in pixel coordinates
        image_size: Width and height in pixels (>= 16)

    Returns:
        (image_size, image_size) uint8 image with values 0..4

    Raises:
        ValueError: If image_size < 16
    """
    if image_size < MIN_IMAGE_SIZE:
        raise ValueError(f"image_size must be >= {MIN_IMAGE_SIZE}, got {image_size}")
    image = np.full((image_size, image_size), BACKGROUND_CODE, dtype=np.uint8)
    for name in DRAW_ORDER:
        structure = StructureId[name]
        loops = polygons.get(structure, [])
        if loops:
            image[fill_polygons(loops, image_size)] = int(structure)
    return image


@dataclass(frozen=True)
class SectorCone:
    """
    Wedge-annulus field of view opening towards +y (down the image).

    Attributes:
        apex: (x, y) transducer position in pixels
        half_angle: Opening half-angle in degrees, in (0, 90)
        min_depth: Inner radius in pixels
        max_depth: Outer radius in pixels
    """

    apex: tuple[float, float]
    half_angle: float
    min_depth: float
    max_depth: float

    def __post_init__(self) -> None:
        if not 0.0 < self.half_angle < 90.0:
            raise ValueError(f"half_angle must be in (0, 90), got {self.half_angle}")
        if not 0.0 <= self.min_depth < self.max_depth:
            raise ValueError(
                f"need 0 <= min_depth < max_depth, got {self.min_depth} and {self.max_depth}"
            )
        object.__setattr__(self, "apex", (float(self.apex[0]), float(self.apex[1])))

    def mask(self, image_size: int) -> np.ndarray:
        """Boolean mask of the pixel centres inside the cone."""
        centres = np.arange(image_size) + 0.5
        dx = centres[None, :] - self.apex[0]
        dy = centres[:, None] - self.apex[1]
        radius = np.hypot(dx, dy)
        angle = np.degrees(np.arctan2(np.abs(dx), dy))
        return (angle <= self.half_angle) & (radius >= self.min_depth) & (radius <= self.max_depth)

    def area(self) -> float:
        """Continuous area of the wedge annulus in square pixels."""
        return math.radians(self.half_angle) * (self.max_depth**2 - self.min_depth**2)

    def to_dict(self) -> dict:
        return {
            "apex": list(self.apex),
            "half_angle": self.half_angle,
            "min_depth": self.min_depth,
            "max_depth": self.max_depth,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SectorCone":
        return cls(
            apex=tuple(data["apex"]),
            half_angle=float(data["half_angle"]),
            min_depth=float(data["min_depth"]),
            max_depth=float(data["max_depth"]),
        )


def make_sector(rng: np.random.Generator, image_size: int) -> SectorCone:
    """
    Random sector: apex near the top centre, 30-45 degree half-angle.

    Draws five uniforms in a fixed order.
    """
    apex_x = image_size * (0.5 + rng.uniform(-SECTOR_APEX_LATERAL, SECTOR_APEX_LATERAL))
    apex_y = image_size * rng.uniform(0.0, SECTOR_APEX_BAND)
    half_angle = rng.uniform(*SECTOR_HALF_ANGLE_RANGE)
    max_depth = image_size * rng.uniform(*SECTOR_MAX_DEPTH_RANGE)
    min_depth = image_size * rng.uniform(*SECTOR_MIN_DEPTH_RANGE)
    return SectorCone(
        apex=(apex_x, apex_y), half_angle=half_angle, min_depth=min_depth, max_depth=max_depth
    )


def apply_sector(image: np.ndarray, cone: SectorCone) -> np.ndarray:
    """Copy of a square `image` with every pixel outside `cone` set to 0."""
    result = np.array(image, copy=True)
    result[~cone.mask(image.shape[0])] = BACKGROUND_CODE
    return result
