"""
Shared constants for the EchoViews project.

This module contains the fixed label codes, landmark names and the default
parameters used across mesh preparation, sample generation, training and
evaluation. Defaults documented here are the values a fresh `RunConfig`
starts from.

Author: EchoViews Contributors
License: MIT
"""

# Label codes written into label rasters (0 is background)
BACKGROUND_CODE: int = 0
STRUCTURE_CODES: dict[str, int] = {"LV": 1, "RV": 2, "LA": 3, "RA": 4}

# Rasterisation draws in this order, so LV ends up on top
DRAW_ORDER: tuple[str, ...] = ("RA", "LA", "RV", "LV")

# Standard view codes
VIEW_CODES: dict[str, int] = {"a2ch": 0, "a4ch": 1, "a5ch": 2, "aplax": 3}

LANDMARK_NAMES: tuple[str, ...] = (
    "lv_apex",
    "mitral_center",
    "tricuspid_center",
    "aortic_valve_center",
)

# Landmarks may sit slightly outside the vertex hull after correspondence
# sampling; allowed margin as a fraction of the bounding-box diagonal.
LANDMARK_BOX_MARGIN: float = 0.02

# Geometry tolerances
COLLINEAR_TOLERANCE: float = 1e-6
ON_PLANE_NUDGE: float = 1e-9
ORTHONORMAL_TOLERANCE: float = 1e-9

# Standard frame construction (degrees)
DEFAULT_A5CH_TILT: float = 15.0
DEFAULT_A2CH_ROTATION: float = 60.0
DEFAULT_APLAX_ROTATION: float = 120.0

# Image placement: millimetres of anatomy spanned by the image height and
# where the landmark origin lands (fractions of the image size)
DEFAULT_FIELD_OF_VIEW_MM: float = 160.0
DEFAULT_IMAGE_ANCHOR: tuple[float, float] = (0.5, 0.6)

# Sector cone sampling ranges
SECTOR_APEX_BAND: float = 0.10
SECTOR_APEX_LATERAL: float = 0.05
SECTOR_HALF_ANGLE_RANGE: tuple[float, float] = (30.0, 45.0)
SECTOR_MAX_DEPTH_RANGE: tuple[float, float] = (0.85, 1.0)
SECTOR_MIN_DEPTH_RANGE: tuple[float, float] = (0.0, 0.05)

# View markers: epsilon as a fraction of the template bounding-box diagonal
DEFAULT_MARKER_EPSILON: float = 0.02

# View scoring: degrees per unit of mean |z| / image_size
DEFAULT_VIEW_LAMBDA: float = 90.0

# Structure localisation: near-plane threshold as a fraction of image size
BBOX_DEPTH_FRACTION: float = 0.05

# Network defaults
DEFAULT_CHANNEL_PLAN: tuple[int, ...] = (4, 8, 8, 16, 16, 32, 32, 48)
DEFAULT_ENCODER_CHANNELS: tuple[int, ...] = (8, 16, 32, 64, 128)
DEFAULT_SPIRAL_LENGTH: int = 9
DEFAULT_LEARNING_RATE: float = 4e-4
DEFAULT_BATCH_SIZE: int = 8
ADAM_BETA1: float = 0.9
ADAM_BETA2: float = 0.999
ADAM_EPSILON: float = 1e-8

# Gradient checks
GRADCHECK_STEP: float = 1e-5
GRADCHECK_LAYER_TOLERANCE: float = 1e-5
GRADCHECK_MODEL_TOLERANCE: float = 1e-4
GRADCHECK_FLOOR: float = 1e-4

# Dataset defaults
DEFAULT_IMAGE_SIZE: int = 64
DEFAULT_SPLIT_FRACTIONS: dict[str, float] = {"train": 0.8, "val": 0.1, "test": 0.1}
SPLIT_NAMES: tuple[str, ...] = ("train", "val", "test")
COORDINATE_DIGITS: int = 9
GENERATOR_VERSION: str = "1.0"
CHECKPOINT_FORMAT_VERSION: int = 1

# Environment variable overriding the output root
OUTPUT_ROOT_ENV: str = "ECHOVIEWS_OUTPUT_ROOT"

# Output formatting
CONSOLE_TABLE_FORMAT: str = "rounded_grid"
CSV_FLOAT_FORMAT: str = "%.10g"
