"""
Run configuration.

A run is described by one JSON file mapped onto a tree of frozen
dataclasses. Keys missing from the file keep their defaults; unknown keys
are rejected with their dotted name. Command-line flags are applied on top
of the file, and the output root may also come from the environment.

Example:
    {
      "seed": 7,
      "meshes": {"count": 2, "template_vertices": 500},
      "dataset": {"per_view_count": 4, "image_size": 64},
      "train": {"epochs": 400, "max_steps": 5000}
    }

Author: EchoViews Contributors
License: MIT
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Union, get_args, get_origin, get_type_hints

from network.train import TrainConfig
from utils.constants import (
    DEFAULT_A2CH_ROTATION,
    DEFAULT_A5CH_TILT,
    DEFAULT_APLAX_ROTATION,
    DEFAULT_FIELD_OF_VIEW_MM,
    DEFAULT_IMAGE_SIZE,
    DEFAULT_SPLIT_FRACTIONS,
    DEFAULT_VIEW_LAMBDA,
    OUTPUT_ROOT_ENV,
    SPLIT_NAMES,
)
from utils.errors import ConfigError
from views.frames import FrameAngles
from views.sampling import ViewSamplingLimits

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MESH_SOURCES = ("phantom", "files")

# Keys owned by another section
HIDDEN_KEYS = {"train": {"seed"}}


@dataclass(frozen=True)
class MeshConfig:
    """
    Attributes:
        source: 'phantom' to generate meshes, 'files' to load `paths`
        count: Number of phantoms to generate
        phantom_detail: Icosphere subdivision level of the phantom chambers
        paths: OBJ files (with landmark sidecars) when source is 'files'
        template_vertices: Vertex budget of the downsampled template
    """

    source: str = "phantom"
    count: int = 2
    phantom_detail: int = 2
    paths: tuple[str, ...] = ()
    template_vertices: int = 500

    def __post_init__(self) -> None:
        if self.source not in MESH_SOURCES:
            raise ConfigError(f"meshes.source must be one of {list(MESH_SOURCES)}")
        if self.source == "phantom" and self.count < 1:
            raise ConfigError(f"meshes.count must be >= 1, got {self.count}")
        if self.source == "files" and not self.paths:
            raise ConfigError("meshes.paths is empty but meshes.source is 'files'")
        if self.template_vertices < 16:
            raise ConfigError(f"meshes.template_vertices must be >= 16, got {self.template_vertices}")


@dataclass(frozen=True)
class ViewConfig:
    a5ch_tilt: float = DEFAULT_A5CH_TILT
    a2ch_rotation: float = DEFAULT_A2CH_ROTATION
    aplax_rotation: float = DEFAULT_APLAX_ROTATION
    marker_epsilon: Optional[float] = None
    view_lambda: float = DEFAULT_VIEW_LAMBDA

    def __post_init__(self) -> None:
        if self.marker_epsilon is not None and not self.marker_epsilon > 0:
            raise ConfigError(f"views.marker_epsilon must be positive, got {self.marker_epsilon}")
        if self.view_lambda < 0:
            raise ConfigError(f"views.view_lambda must be >= 0, got {self.view_lambda}")

    @property
    def angles(self) -> FrameAngles:
        return FrameAngles(self.a5ch_tilt, self.a2ch_rotation, self.aplax_rotation)


@dataclass(frozen=True)
class DatasetConfig:
    per_view_count: int = 4
    image_size: int = DEFAULT_IMAGE_SIZE
    split_fractions: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPLIT_FRACTIONS))
    field_of_view_mm: float = DEFAULT_FIELD_OF_VIEW_MM
    sector_mask: bool = True

    def __post_init__(self) -> None:
        if self.per_view_count < 1:
            raise ConfigError(f"dataset.per_view_count must be >= 1, got {self.per_view_count}")
        if self.image_size < 16:
            raise ConfigError(f"dataset.image_size must be >= 16, got {self.image_size}")
        unknown = set(self.split_fractions) - set(SPLIT_NAMES)
        if unknown:
            raise ConfigError(f"unknown config key 'dataset.split_fractions.{sorted(unknown)[0]}'")
        total = sum(self.split_fractions.values())
        if any(f < 0 for f in self.split_fractions.values()) or not 0 < total <= 1.0 + 1e-9:
            raise ConfigError("dataset.split_fractions must be non-negative and sum to at most 1")
        if not self.field_of_view_mm > 0:
            raise ConfigError("dataset.field_of_view_mm must be positive")


@dataclass(frozen=True)
class EvalConfig:
    """
    Attributes:
        split: Dataset split to evaluate
        gt_as_prediction: Score the ground truth itself instead of the model
        overlays: Plot best, median and worst samples
    """

    split: str = "test"
    gt_as_prediction: bool = False
    overlays: bool = True

    def __post_init__(self) -> None:
        if self.split not in SPLIT_NAMES:
            raise ConfigError(f"eval.split must be one of {list(SPLIT_NAMES)}, got '{self.split}'")


@dataclass(frozen=True)
class RunPaths:
    """Artifact locations below the output root."""

    root: Path

    @property
    def meshes(self) -> Path:
        return self.root / "meshes"

    @property
    def template(self) -> Path:
        return self.meshes / "template.obj"

    @property
    def dataset(self) -> Path:
        return self.root / "dataset"

    @property
    def model(self) -> Path:
        return self.root / "model"

    @property
    def checkpoint(self) -> Path:
        return self.model / "checkpoint.npz"

    @property
    def classifier(self) -> Path:
        return self.model / "classifier.npz"

    @property
    def evaluation(self) -> Path:
        return self.root / "eval"

    @property
    def verification(self) -> Path:
        return self.root / "verify"


@dataclass(frozen=True)
class RunConfig:
    """
    Complete configuration of a run.

    `seed` is the master seed: it also seeds training, so `train.seed` is
    not a configurable key.
    """

    meshes: MeshConfig = field(default_factory=MeshConfig)
    views: ViewConfig = field(default_factory=ViewConfig)
    sampling: ViewSamplingLimits = field(default_factory=ViewSamplingLimits)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    output_root: str = "runs"
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.train.seed != self.seed:
            object.__setattr__(self, "train", replace(self.train, seed=self.seed))

    @property
    def paths(self) -> RunPaths:
        return RunPaths(Path(self.output_root))

    def to_dict(self) -> dict:
        return _to_plain(self)


def _to_plain(value: Any, prefix: str = "") -> Any:
    if isinstance(value, ViewSamplingLimits):
        return value.to_dict()
    if is_dataclass(value):
        hidden = HIDDEN_KEYS.get(prefix, set())
        return {
            f.name: _to_plain(getattr(value, f.name), f.name if not prefix else f"{prefix}.{f.name}")
            for f in fields(value)
            if f.name not in hidden
        }
    if isinstance(value, (tuple, list)):
        return [_to_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _to_plain(v) for k, v in value.items()}
    return value


def _fail(key: str, expected: str, value: Any) -> ConfigError:
    return ConfigError(f"config key '{key}' must be {expected}, got {value!r}")


def _convert(hint: Any, value: Any, key: str) -> Any:
    origin = get_origin(hint)
    if origin is Union:
        options = [a for a in get_args(hint) if a is not type(None)]
        return None if value is None else _convert(options[0], value, key)
    if hint is ViewSamplingLimits:
        if not isinstance(value, Mapping):
            raise _fail(key, "an object", value)
        return ViewSamplingLimits.from_dict(value)
    if is_dataclass(hint):
        return _build(hint, value, key)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise _fail(key, "a list", value)
        args = get_args(hint)
        item = args[0] if args else Any
        return tuple(_convert(item, v, f"{key}[{i}]") for i, v in enumerate(value))
    if origin is dict:
        if not isinstance(value, Mapping):
            raise _fail(key, "an object", value)
        _, item = get_args(hint)
        return {str(k): _convert(item, v, f"{key}.{k}") for k, v in value.items()}
    if hint is bool:
        if not isinstance(value, bool):
            raise _fail(key, "true or false", value)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _fail(key, "an integer", value)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _fail(key, "a number", value)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise _fail(key, "a string", value)
        return value
    return value


def _build(cls: type, data: Any, prefix: str = "") -> Any:
    """Instantiate dataclass `cls` from a JSON object, rejecting unknown keys."""
    if not isinstance(data, Mapping):
        raise _fail(prefix or "<root>", "an object", data)
    hints = get_type_hints(cls)
    allowed = {f.name for f in fields(cls) if f.init} - HIDDEN_KEYS.get(prefix, set())
    for name in data:
        if name not in allowed:
            raise ConfigError(f"unknown config key '{prefix + '.' if prefix else ''}{name}'")
    kwargs = {
        name: _convert(hints[name], value, f"{prefix}.{name}" if prefix else name)
        for name, value in data.items()
    }
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix or 'config'}: {exc}") from exc


def config_from_dict(data: Mapping) -> RunConfig:
    return _build(RunConfig, data)


def load_config(path: PathLike) -> RunConfig:
    """
    Read a JSON run configuration.

    Mesh paths are resolved relative to the configuration file and must exist.

    Raises:
        ConfigError: Unreadable file, bad JSON, unknown key, invalid value or
            missing mesh file
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc

    config = config_from_dict(data)
    if config.meshes.source == "files":
        resolved = []
        for entry in config.meshes.paths:
            mesh_path = Path(entry)
            if not mesh_path.is_absolute():
                mesh_path = path.parent / mesh_path
            if not mesh_path.exists():
                raise ConfigError(f"meshes.paths: {entry} does not exist")
            resolved.append(str(mesh_path))
        config = replace(config, meshes=replace(config.meshes, paths=tuple(resolved)))
    logger.debug("loaded config %s", path)
    return config


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    image_size: Optional[int] = None,
    output_root: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Apply command-line flags; the output root falls back to the environment.

    Precedence: defaults < file < flags; `ECHOVIEWS_OUTPUT_ROOT` replaces the
    output root only when no `--out` flag is given.
    """
    environ = os.environ if environ is None else environ
    changes: dict[str, Any] = {}
    if seed is not None:
        changes["seed"] = seed
    if workers is not None:
        changes["workers"] = workers
    if image_size is not None:
        changes["dataset"] = replace(config.dataset, image_size=image_size)
    if output_root is not None:
        changes["output_root"] = output_root
    elif environ.get(OUTPUT_ROOT_ENV):
        changes["output_root"] = environ[OUTPUT_ROOT_ENV]
    return replace(config, **changes) if changes else config
