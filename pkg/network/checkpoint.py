"""
Model checkpoints.

A checkpoint is an `.npz` archive holding one array per named parameter
and a `__header__` entry: a JSON string with the format version, the model
kind and architecture, and any extra run information (seed, epoch, ...).

Author: EchoViews Contributors
License: MIT
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import numpy as np

from network.model import GcnModel
from network.spirals import SpiralIndex
from utils.base_layer import Layer
from utils.constants import CHECKPOINT_FORMAT_VERSION
from utils.errors import DatasetFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
HEADER_KEY = "__header__"


def write_archive(
    path: PathLike,
    kind: str,
    architecture: dict,
    parameters: Iterable[tuple[str, np.ndarray]],
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    """Write named arrays and a versioned JSON header to `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"format_version": CHECKPOINT_FORMAT_VERSION, "kind": kind, "model": architecture}
    if extra:
        header["extra"] = extra
    arrays = {name: np.asarray(value) for name, value in parameters}
    arrays[HEADER_KEY] = np.array(json.dumps(header, sort_keys=True))
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)
    return path


def read_header(path: PathLike, kind: Optional[str] = None) -> dict:
    """
    Raises:
        DatasetFormatError: Missing header, unsupported version or wrong kind
    """
    with np.load(path, allow_pickle=False) as archive:
        if HEADER_KEY not in archive.files:
            raise DatasetFormatError(f"{path}: not an EchoViews checkpoint (no header)")
        header = json.loads(str(archive[HEADER_KEY]))
    if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise DatasetFormatError(
            f"{path}: checkpoint format {header.get('format_version')} is not supported "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    if kind is not None and header.get("kind") != kind:
        raise DatasetFormatError(f"{path}: holds a '{header.get('kind')}' model, expected '{kind}'")
    return header


def restore_parameters(path: PathLike, layer: Layer) -> None:
    """Copy the archived arrays into the parameters of `layer`, checking shapes."""
    with np.load(path, allow_pickle=False) as archive:
        for name, param in layer.named_parameters():
            if name not in archive.files:
                raise DatasetFormatError(f"{path}: parameter '{name}' missing")
            stored = archive[name]
            if stored.shape != param.shape:
                raise DatasetFormatError(
                    f"{path}: parameter '{name}' has shape {stored.shape}, expected {param.shape}"
                )
            param[...] = stored.astype(param.dtype)


def save_checkpoint(model: GcnModel, path: PathLike, extra: Optional[dict[str, Any]] = None) -> Path:
    """Write all parameters of `model` plus the header."""
    return write_archive(path, "gcn", model.header(), model.named_parameters(), extra)


def load_checkpoint(path: PathLike, spirals: SpiralIndex, dtype=np.float32) -> GcnModel:
    """
    Rebuild a mesh model from a checkpoint.

    Args:
        path: `.npz` written by save_checkpoint
        spirals: Spirals of the template the model was trained on
        dtype: Parameter dtype of the returned model

    Raises:
        DatasetFormatError: Version, architecture or shape mismatch
    """
    arch = read_header(path, kind="gcn")["model"]
    if arch["n_vertices"] != spirals.n_vertices or arch["spiral_length"] != spirals.length:
        raise DatasetFormatError(
            f"{path}: checkpoint expects N={arch['n_vertices']}, l={arch['spiral_length']}, "
            f"template gives N={spirals.n_vertices}, l={spirals.length}"
        )
    model = GcnModel(
        spirals=spirals,
        image_size=arch["image_size"],
        channel_plan=arch["channel_plan"],
        encoder_channels=arch["encoder_channels"],
        mlp_depth=arch["mlp_depth"],
        seed=arch["seed"],
        dtype=dtype,
    )
    restore_parameters(path, model)
    logger.debug("loaded checkpoint %s", path)
    return model
