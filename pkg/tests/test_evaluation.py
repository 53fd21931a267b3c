"""
Tests for evaluation.

Verifies that:
1. Plane fits recover known planes and reject degenerate point sets
2. Vertex error and box IoU match hand-computed values
3. View recognition picks the standard view at exact frames
4. Ground truth scored as prediction gives a perfect report
5. Confusion, overlay and loss-curve figures are written

Author: EchoViews Contributors
License: MIT
"""

import math
import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from dataset.generator import GenerationSettings, generate_sample
from evaluation.metrics import BoundingBox, bbox_iou, mkpts_err, structure_bbox
from evaluation.plane_fit import fit_plane
from evaluation.report import ViewMetrics, build_report, report
from evaluation.view_recognition import predict_view, view_score
from meshing.correspondence import prepare_template_set
from meshing.mesh import StructureId
from meshing.phantom import generate_phantom
from network.train import EpochRecord
from output.visualizer import Visualizer
from utils.errors import DegenerateGeometryError, ShapeError
from verification.suites import ViewRecoverySuite
from views.frames import ViewLabel, axis_rotation, place_in_image, standard_frame, to_plane_coords
from views.markers import encode_all_markers
from views.sampling import PoseSamplingLimits, ViewSamplingLimits

IMAGE_SIZE = 64


@pytest.fixture(scope="module")
def prepared():
    phantoms = [generate_phantom(seed) for seed in (0, 1)]
    return prepare_template_set(phantoms, 500)


@pytest.fixture(scope="module")
def template(prepared):
    return prepared[0]


@pytest.fixture(scope="module")
def markers(template):
    return encode_all_markers(template)


@pytest.fixture(scope="module")
def exact_samples(prepared):
    limits = ViewSamplingLimits(per_view={v: PoseSamplingLimits.fixed() for v in ViewLabel})
    settings = GenerationSettings(image_size=IMAGE_SIZE, seed=0, limits=limits)
    return [
        generate_sample(mesh, index, view, 0, settings)
        for index, mesh in enumerate(prepared[1])
        for view in ViewLabel
    ]


class TestPlaneFit:
    """Test least-squares plane fitting."""

    def test_image_plane(self):
        grid = np.array([[x, y, 0.0] for x in range(5) for y in range(4)], dtype=np.float64)
        fit = fit_plane(grid)
        assert np.allclose(fit.normal, [0.0, 0.0, 1.0])
        assert fit.offset == pytest.approx(0.0, abs=1e-12)
        assert fit.residual == pytest.approx(0.0, abs=1e-12)

    def test_offset_plane(self):
        grid = np.array([[x, y, 5.0] for x in range(3) for y in range(3)], dtype=np.float64)
        fit = fit_plane(grid)
        assert fit.offset == pytest.approx(5.0)
        assert np.allclose(fit.distances(grid), 0.0)

    def test_three_points(self):
        fit = fit_plane(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))
        assert fit.residual == pytest.approx(0.0, abs=1e-12)

    def test_sign_convention(self):
        points = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 2.0, 3.0]])
        assert np.allclose(fit_plane(points).normal, [1.0, 0.0, 0.0])

    def test_noisy_plane(self):
        rng = np.random.default_rng(0)
        normal = np.array([0.2, -0.5, 1.0])
        normal /= np.linalg.norm(normal)
        basis = np.linalg.svd(normal[None])[2][1:]
        points = rng.uniform(-10.0, 10.0, size=(200, 2)) @ basis
        points += rng.normal(0.0, 0.01, size=(200, 1)) * normal
        fit = fit_plane(points)
        angle = math.degrees(math.acos(min(1.0, abs(float(fit.normal @ normal)))))
        assert angle < 2.0
        assert fit.residual < 0.02

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(-5.0, 5.0, size=(40, 3)) * [1.0, 1.0, 0.1]
        rotation = axis_rotation(np.array([1.0, 2.0, -0.5]), 37.0)
        fit = fit_plane(points)
        rotated = fit_plane(points @ rotation.T)
        assert rotated.residual == pytest.approx(fit.residual)
        assert abs(float(rotated.normal @ (rotation @ fit.normal))) == pytest.approx(1.0)

    def test_collinear(self):
        line = np.outer(np.arange(5.0), [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateGeometryError):
            fit_plane(line)

    def test_too_few_points(self):
        with pytest.raises(DegenerateGeometryError):
            fit_plane(np.zeros((2, 3)))


class TestMetrics:
    """Test vertex error and box IoU."""

    def test_box_iou(self):
        a = BoundingBox(0.0, 0.0, 2.0, 2.0)
        b = BoundingBox(1.0, 1.0, 3.0, 3.0)
        assert bbox_iou(a, b) == pytest.approx(1.0 / 7.0)
        assert bbox_iou(a, a) == 1.0
        assert bbox_iou(a, BoundingBox(5.0, 5.0, 6.0, 6.0)) == 0.0

    def test_zero_area_boxes(self):
        point = BoundingBox(1.0, 1.0, 1.0, 1.0)
        assert bbox_iou(point, point) == 1.0
        assert bbox_iou(point, BoundingBox(2.0, 2.0, 2.0, 2.0)) == 0.0

    def test_inverted_box(self):
        with pytest.raises(ValueError):
            BoundingBox(2.0, 0.0, 1.0, 1.0)

    def test_mkpts_err(self):
        gt = np.random.default_rng(0).uniform(0, 128, size=(50, 3))
        assert mkpts_err(gt + [0.0216 * 128, 0.0, 0.0], gt, 128) == pytest.approx(2.16)
        assert mkpts_err(gt, gt, 128) == 0.0

    def test_box_iou_symmetric(self):
        a = BoundingBox(0.0, 1.0, 4.0, 3.0)
        b = BoundingBox(2.5, -1.0, 6.0, 2.0)
        assert bbox_iou(a, b) == bbox_iou(b, a)
        assert 0.0 < bbox_iou(a, b) < 1.0

    def test_mkpts_err_scales_with_image(self):
        rng = np.random.default_rng(1)
        gt = rng.uniform(0, 64, size=(30, 3))
        pred = gt + rng.normal(0.0, 1.0, size=gt.shape)
        assert mkpts_err(2 * pred, 2 * gt, 128) == pytest.approx(mkpts_err(pred, gt, 64))

    def test_mkpts_shape(self):
        with pytest.raises(ShapeError):
            mkpts_err(np.zeros((3, 3)), np.zeros((4, 3)), 64)

    def test_structure_bbox(self):
        coords = np.array([[10.0, 10.0, 0.0], [20.0, 30.0, 0.0], [50.0, 50.0, 40.0], [0.0, 0.0, 0.0]])
        labels = np.array([1, 1, 1, 2])
        box = structure_bbox(coords, labels, StructureId.LV, 100)
        assert box.as_tuple() == (10.0, 10.0, 20.0, 30.0)

    def test_structure_bbox_off_plane(self):
        coords = np.array([[10.0, 10.0, 10.0], [20.0, 30.0, -10.0]])
        assert structure_bbox(coords, np.array([1, 1]), StructureId.LV, 100) is None

    def test_view_metrics(self):
        metrics = ViewMetrics.from_labels([0, 0, 1, 2, 3, 3], [0, 1, 1, 2, 3, 0])
        assert metrics.confusion[0].tolist() == [1, 1, 0, 0]
        assert np.allclose(metrics.recall, [0.5, 1.0, 1.0, 0.5])
        assert np.allclose(metrics.precision, [0.5, 0.5, 1.0, 1.0])
        assert metrics.weighted_accuracy == pytest.approx(4 / 6)

    def test_view_metrics_unpredicted_view(self):
        metrics = ViewMetrics.from_labels([0, 1], [0, 0])
        assert metrics.precision[1] == 0.0
        assert metrics.recall[2] == 0.0


class TestViewRecognition:
    """Test plane-fit view recognition."""

    @pytest.mark.parametrize("view", list(ViewLabel))
    def test_template_standard_frames(self, template, markers, view):
        pose = place_in_image(standard_frame(template, view), IMAGE_SIZE)
        prediction = predict_view(to_plane_coords(template.vertices, pose), markers, IMAGE_SIZE)
        assert prediction.view == view
        assert prediction.scores[view] == min(prediction.scores.values())

    def test_out_of_plane_rotation_scores_worse(self, template, markers):
        pose = place_in_image(standard_frame(template, ViewLabel.A4CH), IMAGE_SIZE)
        coords = to_plane_coords(template.vertices, pose)
        turned = (coords - IMAGE_SIZE / 2) @ axis_rotation(np.array([1.0, 0.0, 0.0]), 90.0).T + IMAGE_SIZE / 2
        before = predict_view(coords, markers, IMAGE_SIZE).scores[ViewLabel.A4CH]
        after = predict_view(turned, markers, IMAGE_SIZE).scores[ViewLabel.A4CH]
        assert after > before + 45.0

    def test_degenerate_markers_score_infinite(self):
        assert view_score(np.zeros((2, 3)), IMAGE_SIZE) == float("inf")

    def test_bad_shape(self, markers):
        with pytest.raises(ShapeError):
            predict_view(np.zeros((10, 2)), markers, IMAGE_SIZE)

    def test_recovery_suite(self):
        outcome = ViewRecoverySuite(n_meshes=2, template_vertices=500).run()
        assert outcome.passed, outcome.detail


class TestReport:
    """Test report aggregation."""

    def test_ground_truth_is_perfect(self, exact_samples, markers, template):
        result = report(exact_samples, None, markers, template.structure_of_vertex)
        assert result.views.weighted_accuracy == 1.0
        assert np.array_equal(np.diag(result.views.confusion), [2, 2, 2, 2])
        assert result.mkpts_mean == 0.0
        for value in result.miou.values():
            assert math.isnan(value) or value == 1.0

    def test_missing_boxes_counted_once(self, exact_samples, markers, template):
        result = report(exact_samples, None, markers, template.structure_of_vertex)
        assert result.missing_gt == result.missing_pred

    def test_offset_prediction(self, exact_samples, markers, template):
        shift = np.array([0.0216 * IMAGE_SIZE, 0.0, 0.0])
        predictions = [s.gt_coords + shift for s in exact_samples]
        result = build_report(exact_samples, predictions, markers, template.structure_of_vertex)
        assert result.mkpts_mean == pytest.approx(2.16)
        assert result.mkpts_std == pytest.approx(0.0, abs=1e-9)
        assert result.views.weighted_accuracy == 1.0

    def test_best_median_worst(self, exact_samples, markers, template):
        result = report(exact_samples, None, markers, template.structure_of_vertex)
        labels = [label for label, _ in result.best_median_worst()]
        assert labels == ["best", "median", "worst"]

    def test_classifier_views(self, exact_samples, markers, template):
        predictions = [s.gt_coords for s in exact_samples]
        constant = [0] * len(exact_samples)
        result = build_report(
            exact_samples, predictions, markers, template.structure_of_vertex, classifier_views=constant
        )
        assert result.classifier.weighted_accuracy == pytest.approx(0.25)
        assert result.samples[0].classifier_view == ViewLabel.A2CH

    def test_length_mismatch(self, exact_samples, markers, template):
        with pytest.raises(ShapeError):
            build_report(exact_samples, [], markers, template.structure_of_vertex)

    def test_empty_sample_set(self, markers, template):
        with pytest.raises(ValueError):
            report([], None, markers, template.structure_of_vertex)


class TestPlots:
    """Test the evaluation figures."""

    def test_confusion_and_overlays(self, exact_samples, markers, template, tmp_path):
        pytest.importorskip("matplotlib")
        result = report(exact_samples, None, markers, template.structure_of_vertex)
        visualizer = Visualizer(tmp_path)
        confusion = visualizer.plot_confusion(result.views.confusion)
        overlays = visualizer.plot_overlays(
            result,
            {s.sample_id: s.image for s in exact_samples},
            {s.sample_id: s.gt_coords for s in exact_samples},
        )
        assert confusion.name == "confusion.png" and confusion.stat().st_size > 0
        assert overlays.name == "overlays.png" and overlays.stat().st_size > 0

    def test_loss_curve(self, tmp_path):
        pytest.importorskip("matplotlib")
        history = [EpochRecord(epoch, 1.0 / epoch, float("nan"), epoch * 4) for epoch in range(1, 6)]
        path = Visualizer(tmp_path).plot_loss_curve(history)
        assert path.exists()
