"""
EchoViews - Geometric evaluation.

Plane fitting, view recognition, vertex error, near-plane boxes and the
aggregated evaluation report.
"""

from .metrics import BoundingBox, bbox_iou, mkpts_err, structure_bbox
from .plane_fit import PlaneFit, fit_plane
from .report import EvalReport, SampleEvaluation, ViewMetrics, build_report, report
from .view_recognition import ViewPrediction, predict_view

__all__ = [
    "BoundingBox",
    "EvalReport",
    "PlaneFit",
    "SampleEvaluation",
    "ViewMetrics",
    "ViewPrediction",
    "bbox_iou",
    "build_report",
    "fit_plane",
    "mkpts_err",
    "predict_view",
    "report",
    "structure_bbox",
]
