"""
Evaluation report over a set of samples.

Collects per-sample view recognition, vertex error and near-plane box
IoU, and aggregates them into the confusion matrix, per-view precision
and recall, weighted accuracy, mkptsErr and per-structure box mIoU.

Author: EchoViews Contributors
License: MIT
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Optional, Sequence

import numpy as np

from dataset.sample import ViewSample
from evaluation.metrics import BoundingBox, bbox_iou, mkpts_err, structure_bbox
from evaluation.view_recognition import predict_view
from meshing.mesh import StructureId
from utils.constants import DEFAULT_VIEW_LAMBDA
from utils.errors import ShapeError
from views.frames import ViewLabel
from views.markers import ViewMarkerSet

logger = logging.getLogger(__name__)

N_VIEWS = len(ViewLabel)


@dataclass
class ViewMetrics:
    """
    View classification quality.

    Attributes:
        confusion: (4, 4) counts, rows = true view, columns = predicted view
        precision: Per-view precision (0 where a view is never predicted)
        recall: Per-view recall (0 where a view never occurs)
        weighted_accuracy: Support-weighted mean recall
    """

    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    weighted_accuracy: float

    @classmethod
    def from_labels(cls, true: Sequence[int], predicted: Sequence[int]) -> "ViewMetrics":
        true = np.asarray(true, dtype=np.int64)
        predicted = np.asarray(predicted, dtype=np.int64)
        confusion = np.zeros((N_VIEWS, N_VIEWS), dtype=np.int64)
        np.add.at(confusion, (true, predicted), 1)
        hits = np.diag(confusion).astype(np.float64)
        support = confusion.sum(axis=1)
        predicted_count = confusion.sum(axis=0)
        recall = np.divide(hits, support, out=np.zeros(N_VIEWS), where=support > 0)
        precision = np.divide(hits, predicted_count, out=np.zeros(N_VIEWS), where=predicted_count > 0)
        total = support.sum()
        weighted = float(np.sum(recall * support) / total) if total else 0.0
        return cls(confusion, precision, recall, weighted)


@dataclass
class SampleEvaluation:
    """One row of samples.csv."""

    sample_id: str
    true_view: ViewLabel
    predicted_view: ViewLabel
    scores: dict[ViewLabel, float]
    mkpts_err: float
    iou: dict[StructureId, Optional[float]]
    classifier_view: Optional[ViewLabel] = None

    @property
    def mean_iou(self) -> float:
        values = [v for v in self.iou.values() if v is not None]
        return float(np.mean(values)) if values else float("nan")

    def as_row(self) -> dict:
        row = {
            "sample_id": self.sample_id,
            "true_view": self.true_view.short_name,
            "predicted_view": self.predicted_view.short_name,
        }
        for view, score in self.scores.items():
            row[f"score_{view.short_name}"] = score
        row["mkpts_err"] = self.mkpts_err
        for structure, value in self.iou.items():
            row[f"iou_{structure.name}"] = np.nan if value is None else value
        if self.classifier_view is not None:
            row["classifier_view"] = self.classifier_view.short_name
        return row


@dataclass
class EvalReport:
    """
    Attributes:
        views: Metrics of the plane-fit view recognition
        mkpts_mean: Mean mkptsErr over samples, in percent of image size
        mkpts_std: Population standard deviation of mkptsErr
        miou: Per-structure mean box IoU over samples where both boxes exist
        missing_gt: Per-structure count of samples without a ground-truth box
        missing_pred: Per-structure count of samples without a predicted box
        samples: Per-sample rows in input order
        classifier: Metrics of the baseline classifier, when evaluated
        settings: Run information recorded with the report (seed, config)
    """

    views: ViewMetrics
    mkpts_mean: float
    mkpts_std: float
    miou: dict[StructureId, float]
    missing_gt: dict[StructureId, int]
    missing_pred: dict[StructureId, int]
    samples: list[SampleEvaluation]
    classifier: Optional[ViewMetrics] = None
    settings: dict = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def ranked_samples(self) -> list[SampleEvaluation]:
        """Samples with a defined mean IoU, best first; ties keep input order."""
        valid = [s for s in self.samples if np.isfinite(s.mean_iou)]
        return sorted(valid, key=lambda s: -s.mean_iou)

    def best_median_worst(self) -> list[tuple[str, SampleEvaluation]]:
        ranked = self.ranked_samples()
        if not ranked:
            return []
        return [
            ("best", ranked[0]),
            ("median", ranked[len(ranked) // 2]),
            ("worst", ranked[-1]),
        ]


def evaluate_sample(
    sample: ViewSample,
    pred_coords: np.ndarray,
    markers: Mapping[ViewLabel, ViewMarkerSet],
    structure_of_vertex: np.ndarray,
    lam: float = DEFAULT_VIEW_LAMBDA,
) -> SampleEvaluation:
    """Compare one prediction (pixels, plane frame) against its sample."""
    pred_coords = np.asarray(pred_coords, dtype=np.float64)
    if pred_coords.shape != sample.gt_coords.shape:
        raise ShapeError(
            f"{sample.sample_id}: prediction {pred_coords.shape} vs ground truth "
            f"{sample.gt_coords.shape}"
        )
    size = sample.image_size
    prediction = predict_view(pred_coords, markers, size, lam)
    iou: dict[StructureId, Optional[float]] = {}
    for structure in StructureId:
        gt_box = structure_bbox(sample.gt_coords, structure_of_vertex, structure, size)
        pred_box = structure_bbox(pred_coords, structure_of_vertex, structure, size)
        iou[structure] = _pair_iou(gt_box, pred_box)
    return SampleEvaluation(
        sample_id=sample.sample_id,
        true_view=ViewLabel(sample.view),
        predicted_view=prediction.view,
        scores=prediction.scores,
        mkpts_err=mkpts_err(pred_coords, sample.gt_coords, size),
        iou=iou,
    )


def _pair_iou(gt_box: Optional[BoundingBox], pred_box: Optional[BoundingBox]) -> Optional[float]:
    if gt_box is None or pred_box is None:
        return None
    return bbox_iou(gt_box, pred_box)


def build_report(
    samples: Sequence[ViewSample],
    predictions: Sequence[np.ndarray],
    markers: Mapping[ViewLabel, ViewMarkerSet],
    structure_of_vertex: np.ndarray,
    lam: float = DEFAULT_VIEW_LAMBDA,
    classifier_views: Optional[Sequence[int]] = None,
    settings: Optional[dict] = None,
) -> EvalReport:
    """
    Aggregate per-sample evaluations.

    Args:
        samples: Samples with ground truth
        predictions: (N, 3) predicted plane coordinates per sample, in pixels
        markers: View marker sets of the template
        structure_of_vertex: Template structure codes
        lam: View score depth weight
        classifier_views: Baseline classifier predictions per sample, if any
        settings: Run information stored in the report

    Returns:
        EvalReport
    """
    if len(samples) != len(predictions):
        raise ShapeError(f"{len(samples)} samples but {len(predictions)} predictions")
    rows = [
        evaluate_sample(sample, pred, markers, structure_of_vertex, lam)
        for sample, pred in zip(samples, predictions)
    ]
    if classifier_views is not None:
        for row, code in zip(rows, classifier_views):
            row.classifier_view = ViewLabel(int(code))

    true_views = [int(r.true_view) for r in rows]
    errors = np.array([r.mkpts_err for r in rows], dtype=np.float64)
    miou: dict[StructureId, float] = {}
    missing_gt: dict[StructureId, int] = {}
    missing_pred: dict[StructureId, int] = {}
    for structure in StructureId:
        values = [r.iou[structure] for r in rows if r.iou[structure] is not None]
        miou[structure] = float(np.mean(values)) if values else float("nan")
        missing_gt[structure] = sum(
            structure_bbox(s.gt_coords, structure_of_vertex, structure, s.image_size) is None
            for s in samples
        )
        missing_pred[structure] = sum(
            structure_bbox(p, structure_of_vertex, structure, s.image_size) is None
            for s, p in zip(samples, predictions)
        )

    report = EvalReport(
        views=ViewMetrics.from_labels(true_views, [int(r.predicted_view) for r in rows]),
        mkpts_mean=float(errors.mean()) if errors.size else float("nan"),
        mkpts_std=float(errors.std()) if errors.size else float("nan"),
        miou=miou,
        missing_gt=missing_gt,
        missing_pred=missing_pred,
        samples=rows,
        classifier=(
            ViewMetrics.from_labels(true_views, [int(c) for c in classifier_views])
            if classifier_views is not None
            else None
        ),
        settings=dict(settings or {}),
    )
    logger.info(
        "evaluated %d sample(s): view accuracy %.3f, mkptsErr %.3f%%",
        report.n_samples,
        report.views.weighted_accuracy,
        report.mkpts_mean,
    )
    return report


def report(
    samples: Sequence[ViewSample],
    model,
    markers: Mapping[ViewLabel, ViewMarkerSet],
    structure_of_vertex: np.ndarray,
    lam: float = DEFAULT_VIEW_LAMBDA,
    classifier=None,
    settings: Optional[dict] = None,
) -> EvalReport:
    """
    Run `model` on the sample images and build the report.

    Args:
        model: Object with `predict(images) -> (B, N, 3)` pixel coordinates,
            or None to use the ground truth as prediction
        classifier: Optional baseline with `predict(images) -> (B,)` view codes
    """
    if not samples:
        raise ValueError("cannot report on an empty sample set")
    images = np.stack([s.image for s in samples])
    if model is None:
        predictions = [s.gt_coords for s in samples]
    else:
        predictions = list(model.predict(images))
    classifier_views = classifier.predict(images) if classifier is not None else None
    return build_report(
        samples, predictions, markers, structure_of_vertex, lam, classifier_views, settings
    )
