"""
Oracle suites behind `echoview verify`.

    SlicingOracleSuite   slice + rasterise vs. per-pixel inside tests
    GradientCheckSuite   every layer type and the full model vs. central differences
    ViewRecoverySuite    noiseless ground truth through view recognition

Author: EchoViews Contributors
License: MIT
"""

import logging
from typing import Optional

import numpy as np

from evaluation.view_recognition import predict_view
from meshing.adjacency import build_adjacency
from meshing.correspondence import prepare_template_set
from meshing.phantom import generate_phantom
from network.gradcheck import check_gradients
from network.layers import ELU, Conv2D, Dense, GlobalAvgPool
from network.model import GcnModel, prepare_images
from network.spiral_conv import SpiralConv
from network.spirals import SpiralIndex, build_spirals
from utils.base_layer import Layer
from utils.base_suite import SuiteOutcome, VerificationSuite
from utils.constants import (
    DEFAULT_SPIRAL_LENGTH,
    GRADCHECK_LAYER_TOLERANCE,
    GRADCHECK_MODEL_TOLERANCE,
)
from views.frames import FrameAngles, ViewLabel, place_in_image, standard_frame, to_plane_coords
from views.markers import encode_all_markers
from views.raster import rasterize
from views.sampling import PoseSamplingLimits, sample_pose
from views.slicing import slice_mesh
from views.voxel_oracle import label_iou, voxel_label_image

logger = logging.getLogger(__name__)


class SlicingOracleSuite(VerificationSuite):
    """Label images from slicing agree with brute-force inside tests."""

    def __init__(
        self,
        n_pairs: int = 50,
        image_size: int = 256,
        min_iou: float = 0.95,
        n_phantoms: int = 10,
        seed: int = 0,
        budget: Optional[float] = 300.0,
    ):
        self.n_pairs = n_pairs
        self.image_size = image_size
        self.min_iou = min_iou
        self.n_phantoms = n_phantoms
        self.seed = seed
        self.budget = budget
        self._phantoms: list = []

    @property
    def name(self) -> str:
        return "Slicing oracle"

    @property
    def description(self) -> str:
        return f"{self.n_pairs} random cutplanes, raster vs. inside-test IoU >= {self.min_iou}"

    @property
    def budget_seconds(self) -> Optional[float]:
        return self.budget

    def setup(self) -> None:
        self._phantoms = [generate_phantom(self.seed + i) for i in range(self.n_phantoms)]

    def run(self) -> SuiteOutcome:
        if not self._phantoms:
            self.setup()
        rng = np.random.default_rng(self.seed)
        limits = PoseSamplingLimits()
        ious = []
        for _ in range(self.n_pairs):
            mesh = self._phantoms[int(rng.integers(len(self._phantoms)))]
            view = ViewLabel(int(rng.integers(len(ViewLabel))))
            pose = place_in_image(
                sample_pose(standard_frame(mesh, view), limits, rng), self.image_size
            )
            raster = rasterize(slice_mesh(mesh, pose), self.image_size)
            oracle = voxel_label_image(mesh, pose, self.image_size)
            ious.append(label_iou(raster, oracle))
        ious_arr = np.array(ious)
        passing = int(np.count_nonzero(ious_arr >= self.min_iou))
        return SuiteOutcome(
            passed=passing == self.n_pairs,
            detail=f"{passing}/{self.n_pairs} pairs, min IoU {ious_arr.min():.4f}",
            metrics={"min_iou": float(ious_arr.min()), "mean_iou": float(ious_arr.mean())},
        )


def small_spirals(seed: int = 0, length: int = DEFAULT_SPIRAL_LENGTH) -> SpiralIndex:
    """Spirals of a coarse phantom, small enough for finite differences."""
    mesh = generate_phantom(seed, detail=1)
    return build_spirals(build_adjacency(mesh), mesh.faces, length)


class GradientCheckSuite(VerificationSuite):
    """Backward passes of all layer types agree with central differences in float64."""

    def __init__(
        self,
        seed: int = 0,
        n_params: int = 20,
        image_size: int = 32,
        budget: Optional[float] = 120.0,
    ):
        self.seed = seed
        self.n_params = n_params
        self.image_size = image_size
        self.budget = budget

    @property
    def name(self) -> str:
        return "Gradient checks"

    @property
    def description(self) -> str:
        return (
            f"layers rel. err < {GRADCHECK_LAYER_TOLERANCE:g}, "
            f"full model < {GRADCHECK_MODEL_TOLERANCE:g}"
        )

    @property
    def budget_seconds(self) -> Optional[float]:
        return self.budget

    def cases(self, rng: np.random.Generator) -> list[tuple[str, Layer, np.ndarray, float]]:
        """(label, layer, input, tolerance) for every checked layer."""
        spirals = small_spirals(self.seed)
        n = spirals.n_vertices
        tol = GRADCHECK_LAYER_TOLERANCE
        images = rng.integers(0, 5, size=(2, self.image_size, self.image_size))
        model = GcnModel(spirals, self.image_size, seed=self.seed, dtype=np.float64)
        return [
            ("conv", Conv2D(2, 3, rng), rng.standard_normal((2, 2, 8, 8)), tol),
            ("pool", GlobalAvgPool(), rng.standard_normal((2, 3, 4, 4)), tol),
            ("compression", Dense(16, n * 4, rng), rng.standard_normal((2, 16)), tol),
            ("spiral", SpiralConv(4, 5, spirals, rng), rng.standard_normal((2, n, 4)), tol),
            (
                "spiral-mlp",
                SpiralConv(3, 4, spirals, rng, mlp_depth=2),
                rng.standard_normal((2, n, 3)),
                tol,
            ),
            ("elu", ELU(), rng.standard_normal((4, 12)), tol),
            ("head", Dense(48, 3, rng), rng.standard_normal((2, n, 48)), tol),
            ("model", model, prepare_images(images, np.float64), GRADCHECK_MODEL_TOLERANCE),
        ]

    def run(self) -> SuiteOutcome:
        rng = np.random.default_rng(self.seed)
        failures = []
        metrics = {}
        for label, layer, x, tolerance in self.cases(rng):
            layer.astype(np.float64)
            result = check_gradients(layer, x, rng, n_params=self.n_params)
            metrics[label] = result.max_relative_error
            logger.debug("%s: max rel. err %.3g at %s", label, result.max_relative_error, result.worst_entry)
            if not result.passed(tolerance):
                failures.append(f"{label} {result.max_relative_error:.2g} at {result.worst_entry}")
        worst = max(metrics.values())
        if failures:
            return SuiteOutcome(False, "failed: " + "; ".join(failures), metrics)
        return SuiteOutcome(True, f"{len(metrics)} layers, worst rel. err {worst:.2g}", metrics)


class ViewRecoverySuite(VerificationSuite):
    """Exact standard-frame ground truth is recognised as its own view."""

    def __init__(
        self,
        n_meshes: int = 5,
        image_size: int = 64,
        template_vertices: int = 500,
        seed: int = 0,
        angles: Optional[FrameAngles] = None,
        budget: Optional[float] = None,
    ):
        self.n_meshes = n_meshes
        self.image_size = image_size
        self.template_vertices = template_vertices
        self.seed = seed
        self.angles = angles or FrameAngles()
        self.budget = budget

    @property
    def name(self) -> str:
        return "Noiseless view recovery"

    @property
    def description(self) -> str:
        return f"{self.n_meshes} phantoms x 4 views at exact standard frames"

    @property
    def budget_seconds(self) -> Optional[float]:
        return self.budget

    def run(self) -> SuiteOutcome:
        phantoms = [generate_phantom(self.seed + i) for i in range(self.n_meshes)]
        template, meshes = prepare_template_set(phantoms, self.template_vertices)
        markers = encode_all_markers(template, angles=self.angles)
        misses = []
        total = 0
        for mesh in meshes:
            for view in ViewLabel:
                pose = place_in_image(standard_frame(mesh, view, self.angles), self.image_size)
                coords = to_plane_coords(mesh.vertices, pose)
                predicted = predict_view(coords, markers, self.image_size).view
                total += 1
                if predicted != view:
                    misses.append(f"{mesh.mesh_id}/{view.short_name}->{predicted.short_name}")
        correct = total - len(misses)
        detail = f"{correct}/{total} correct"
        if misses:
            detail += " (" + ", ".join(misses[:4]) + ")"
        return SuiteOutcome(correct == total, detail, {"accuracy": correct / total})
