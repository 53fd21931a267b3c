"""
Randomised cutplane sampling around a standard frame.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from utils.errors import ConfigError
from views.frames import PlanePose, ViewLabel, axis_rotation

Range = tuple[float, float]


def _check_range(name: str, value: Range) -> Range:
    if len(value) != 2:
        raise ConfigError(f"{name}: expected [low, high], got {list(value)}")
    low, high = float(value[0]), float(value[1])
    if not (np.isfinite(low) and np.isfinite(high)) or low > high:
        raise ConfigError(f"{name}: invalid range [{low}, {high}]")
    return low, high


@dataclass(frozen=True)
class PoseSamplingLimits:
    """
    Uniform perturbation ranges for one view.

    Attributes:
        rotation_deg: Ranges of the rotations about the plane x, y and z axes
        translation_mm: Ranges of the shifts along the plane x, y and z axes
        scale: Range of the zoom factor applied to the pose scale
    """

    rotation_deg: tuple[Range, Range, Range] = ((-5.0, 5.0), (-5.0, 5.0), (-10.0, 10.0))
    translation_mm: tuple[Range, Range, Range] = ((-5.0, 5.0), (-5.0, 5.0), (-2.0, 2.0))
    scale: Range = (0.9, 1.1)

    def __post_init__(self) -> None:
        if len(self.rotation_deg) != 3 or len(self.translation_mm) != 3:
            raise ConfigError("rotation_deg and translation_mm need three ranges each")
        rotation = tuple(_check_range(f"rotation_deg[{i}]", r) for i, r in enumerate(self.rotation_deg))
        translation = tuple(
            _check_range(f"translation_mm[{i}]", r) for i, r in enumerate(self.translation_mm)
        )
        scale = _check_range("scale", self.scale)
        if scale[0] <= 0:
            raise ConfigError(f"scale: range must be positive, got [{scale[0]}, {scale[1]}]")
        object.__setattr__(self, "rotation_deg", rotation)
        object.__setattr__(self, "translation_mm", translation)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def fixed(cls) -> "PoseSamplingLimits":
        """Zero-width limits: sampling returns the standard frame."""
        zero = (0.0, 0.0)
        return cls(rotation_deg=(zero, zero, zero), translation_mm=(zero, zero, zero), scale=(1.0, 1.0))

    def to_dict(self) -> dict:
        return {
            "rotation_deg": [list(r) for r in self.rotation_deg],
            "translation_mm": [list(r) for r in self.translation_mm],
            "scale": list(self.scale),
        }

    @classmethod
    def from_dict(cls, data: Mapping, prefix: str = "sampling") -> "PoseSamplingLimits":
        """
        Parse one view's limits; keys left out keep the defaults.

        Raises:
            ConfigError: On unknown keys or malformed ranges, naming the dotted key
        """
        if not isinstance(data, Mapping):
            raise ConfigError(f"{prefix}: expected an object of limits, got {data!r}")
        unknown = set(data) - {"rotation_deg", "translation_mm", "scale"}
        if unknown:
            raise ConfigError(f"unknown sampling limit key(s) {sorted(unknown)} in {prefix}")
        defaults = cls()
        values = {}
        for key in ("rotation_deg", "translation_mm"):
            try:
                values[key] = tuple(tuple(r) for r in data.get(key, getattr(defaults, key)))
            except TypeError:
                raise ConfigError(
                    f"{prefix}.{key}: expected three [low, high] ranges, got {data[key]!r}"
                ) from None
        try:
            values["scale"] = tuple(data.get("scale", defaults.scale))
        except TypeError:
            raise ConfigError(f"{prefix}.scale: expected [low, high], got {data['scale']!r}") from None
        try:
            return cls(**values)
        except ConfigError as exc:
            raise ConfigError(f"{prefix}.{exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{prefix}: {exc}") from None


@dataclass(frozen=True)
class ViewSamplingLimits:
    """Per-view sampling limits, defaulting to PoseSamplingLimits() for every view."""

    per_view: Mapping[ViewLabel, PoseSamplingLimits] = field(
        default_factory=lambda: {view: PoseSamplingLimits() for view in ViewLabel}
    )

    def __getitem__(self, view: ViewLabel) -> PoseSamplingLimits:
        return self.per_view.get(ViewLabel(view), PoseSamplingLimits())

    def to_dict(self) -> dict:
        return {view.short_name: self[view].to_dict() for view in ViewLabel}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ViewSamplingLimits":
        """Parse {view name: limits}; views left out keep the defaults."""
        per_view = {}
        for name, limits in data.items():
            try:
                view = ViewLabel.from_name(name)
            except ValueError:
                raise ConfigError(f"unknown view '{name}' in sampling limits") from None
            per_view[view] = PoseSamplingLimits.from_dict(limits, prefix=f"sampling.{name}")
        return cls(per_view={view: per_view.get(view, PoseSamplingLimits()) for view in ViewLabel})


def perturbation_rotation(angles_deg: np.ndarray) -> np.ndarray:
    """Rz @ Ry @ Rx for angles about the plane axes x, y, z."""
    rx = axis_rotation(np.array([1.0, 0.0, 0.0]), angles_deg[0])
    ry = axis_rotation(np.array([0.0, 1.0, 0.0]), angles_deg[1])
    rz = axis_rotation(np.array([0.0, 0.0, 1.0]), angles_deg[2])
    return rz @ ry @ rx


def sample_pose(
    frame: PlanePose, limits: PoseSamplingLimits, rng: np.random.Generator
) -> PlanePose:
    """
    Draw a cutplane around a standard frame.

    The perturbation rotates and shifts the plane frame about its own
    origin, then multiplies the scale. Seven uniforms are always drawn in
    the same order (3 angles, 3 shifts, 1 zoom), so a given generator
    state yields the same pose whatever the limits.

    Args:
        frame: Standard frame of the target view
        limits: Perturbation ranges
        rng: Seeded generator, advanced by seven draws

    Returns:
        Perturbed pose carrying the view of `frame`
    """
    angles = np.array([rng.uniform(low, high) for low, high in limits.rotation_deg])
    shift = np.array([rng.uniform(low, high) for low, high in limits.translation_mm])
    zoom = rng.uniform(*limits.scale)

    rotation = perturbation_rotation(angles)
    return PlanePose(
        rotation=rotation @ frame.rotation,
        translation=rotation @ frame.translation + shift,
        scale=frame.scale * zoom,
        view=frame.view,
    )
