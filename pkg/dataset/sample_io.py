"""
On-disk dataset layout.

    <root>/manifest.json
    <root>/<split>/sample_<id>.pgm     8-bit binary PGM (P5), raw labels 0..4
    <root>/<split>/sample_<id>.meta    JSON record, see docs/FORMATS.md

Ground-truth coordinates are written with 9 significant digits; the pose
keeps full float precision so a sample can be re-cut exactly.

Author: EchoViews Contributors
License: MIT
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from dataset.sample import DatasetManifest, ViewSample
from utils.constants import COORDINATE_DIGITS, GENERATOR_VERSION
from utils.errors import DatasetFormatError
from views.frames import PlanePose, ViewLabel
from views.raster import SectorCone

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.json"


def sample_paths(directory: PathLike, sample_id: str) -> tuple[Path, Path]:
    """(image, metadata) paths of a sample inside a split directory."""
    directory = Path(directory)
    return directory / f"sample_{sample_id}.pgm", directory / f"sample_{sample_id}.meta"


def write_pgm(image: np.ndarray, path: PathLike) -> None:
    """Write a square uint8 image as binary PGM."""
    height, width = image.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as handle:
        handle.write(header + np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_pgm(path: PathLike) -> np.ndarray:
    """
    Read a binary (P5) 8-bit PGM.

    Raises:
        DatasetFormatError: Wrong magic number, bad header or truncated data
    """
    path = Path(path)
    data = path.read_bytes()
    tokens: list[bytes] = []
    position = 0
    while len(tokens) < 4:
        while position < len(data) and data[position : position + 1].isspace():
            position += 1
        if position < len(data) and data[position : position + 1] == b"#":
            while position < len(data) and data[position : position + 1] not in (b"\n", b"\r"):
                position += 1
            continue
        start = position
        while position < len(data) and not data[position : position + 1].isspace():
            position += 1
        if start == position:
            raise DatasetFormatError(f"{path}: truncated PGM header")
        tokens.append(data[start:position])
    position += 1  # single whitespace after maxval

    if tokens[0] != b"P5":
        raise DatasetFormatError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DatasetFormatError(f"{path}: non-numeric PGM header") from None
    if maxval != 255 or width <= 0 or height <= 0:
        raise DatasetFormatError(f"{path}: unsupported PGM header {width}x{height} max {maxval}")

    pixels = data[position:]
    if len(pixels) < width * height:
        raise DatasetFormatError(
            f"{path}: truncated PGM, expected {width * height} bytes, got {len(pixels)}"
        )
    return np.frombuffer(pixels[: width * height], dtype=np.uint8).reshape(height, width).copy()


def _coordinate_rows(coords: np.ndarray) -> list[list[float]]:
    return [[float(f"{c:.{COORDINATE_DIGITS}g}") for c in row] for row in coords]


def write_sample(sample: ViewSample, directory: PathLike) -> tuple[Path, Path]:
    """
    Write the image and metadata of `sample` into `directory`.

    Returns:
        (image path, metadata path)
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    image_path, meta_path = sample_paths(directory, sample.sample_id)
    write_pgm(sample.image, image_path)

    record = {
        "generator_version": GENERATOR_VERSION,
        "gt_coords": _coordinate_rows(sample.gt_coords),
        "image_size": sample.image_size,
        "mesh_id": sample.mesh_id,
        "n_vertices": sample.n_vertices,
        "pose": sample.pose.to_dict(),
        "sample_id": sample.sample_id,
        "sector": sample.sector.to_dict() if sample.sector is not None else None,
        "view": sample.view.short_name,
    }
    with open(meta_path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(record, handle, sort_keys=True, indent=1)
        handle.write("\n")
    return image_path, meta_path


def read_sample(directory: PathLike, sample_id: str) -> ViewSample:
    """
    Read one sample written by write_sample.

    Raises:
        DatasetFormatError: Corrupt image or metadata
        OSError: Missing files
    """
    image_path, meta_path = sample_paths(directory, sample_id)
    image = read_pgm(image_path)
    try:
        with open(meta_path, "r", encoding="utf-8") as handle:
            record = json.load(handle)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"{meta_path}:{e.lineno}: invalid metadata: {e.msg}") from None

    try:
        coords = np.array(record["gt_coords"], dtype=np.float64)
        if coords.shape != (int(record["n_vertices"]), 3):
            raise DatasetFormatError(
                f"{meta_path}: gt_coords shape {coords.shape} does not match "
                f"n_vertices {record['n_vertices']}"
            )
        if image.shape != (int(record["image_size"]),) * 2:
            raise DatasetFormatError(f"{meta_path}: image size does not match {image_path}")
        sector = record.get("sector")
        return ViewSample(
            sample_id=str(record["sample_id"]),
            mesh_id=str(record["mesh_id"]),
            view=ViewLabel.from_name(record["view"]),
            image=image,
            gt_coords=coords,
            pose=PlanePose.from_dict(record["pose"]),
            sector=SectorCone.from_dict(sector) if sector is not None else None,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"{meta_path}: malformed metadata: {e}") from None


def write_manifest(manifest: DatasetManifest, root: PathLike) -> Path:
    path = Path(root) / MANIFEST_NAME
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(manifest.to_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")
    return path


def read_manifest(root: PathLike) -> DatasetManifest:
    """
    Raises:
        DatasetFormatError: If the manifest is missing or malformed
    """
    path = Path(root) / MANIFEST_NAME
    if not path.exists():
        raise DatasetFormatError(f"no dataset manifest at {path}")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"{path}:{e.lineno}: invalid manifest: {e.msg}") from None
    return DatasetManifest.from_dict(data)


def load_split(
    root: PathLike, split: str, manifest: Optional[DatasetManifest] = None
) -> list[ViewSample]:
    """All samples of one split, in manifest order."""
    manifest = manifest or read_manifest(root)
    directory = Path(root) / split
    samples = [read_sample(directory, sample_id) for sample_id in manifest.splits.get(split, [])]
    for sample in samples:
        if sample.n_vertices != manifest.n_vertices:
            raise DatasetFormatError(
                f"sample {sample.sample_id} has {sample.n_vertices} vertices, "
                f"manifest says {manifest.n_vertices}"
            )
    logger.debug("loaded %d %s sample(s) from %s", len(samples), split, root)
    return samples
