"""
CSV export of training curves, evaluation reports and verification runs.

All files are written through pandas with a fixed float format and `\\n`
line endings, so identical results give byte-identical files.

Author: EchoViews Contributors
License: MIT
"""

from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd

from utils.constants import CSV_FLOAT_FORMAT
from views.frames import ViewLabel

PathLike = Union[str, Path]


class CSVExporter:
    """
    Exports EchoViews results to CSV files.

    Files:
    - loss_curve.csv: epoch, train_loss, val_loss, steps
    - report.csv: metric, value (long format)
    - confusion.csv: true views as rows, predicted views as columns
    - samples.csv: one row per evaluated sample
    - verification.csv: one row per suite
    """

    def __init__(self, output_dir: PathLike):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _write(self, frame: pd.DataFrame, filename: str, index: bool = False) -> Path:
        path = self.output_dir / filename
        frame.to_csv(path, index=index, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return path

    def export_loss_curve(self, history: Sequence, filename: str = "loss_curve.csv") -> Path:
        frame = pd.DataFrame(
            {
                "epoch": [r.epoch for r in history],
                "train_loss": [r.train_loss for r in history],
                "val_loss": [r.val_loss for r in history],
                "steps": [r.steps for r in history],
            }
        )
        return self._write(frame, filename)

    def report_metrics(self, report) -> list[tuple[str, object]]:
        """Flat (metric, value) pairs of a report."""
        metrics: list[tuple[str, object]] = [
            ("n_samples", report.n_samples),
            ("weighted_accuracy", report.views.weighted_accuracy),
        ]
        for view in ViewLabel:
            metrics.append((f"precision_{view.short_name}", report.views.precision[int(view)]))
            metrics.append((f"recall_{view.short_name}", report.views.recall[int(view)]))
        metrics.append(("mkpts_err_mean", report.mkpts_mean))
        metrics.append(("mkpts_err_std", report.mkpts_std))
        for structure, value in report.miou.items():
            metrics.append((f"miou_{structure.name}", value))
            metrics.append((f"missing_gt_{structure.name}", report.missing_gt[structure]))
            metrics.append((f"missing_pred_{structure.name}", report.missing_pred[structure]))
        if report.classifier is not None:
            metrics.append(("classifier_weighted_accuracy", report.classifier.weighted_accuracy))
            for view in ViewLabel:
                metrics.append(
                    (f"classifier_precision_{view.short_name}", report.classifier.precision[int(view)])
                )
                metrics.append(
                    (f"classifier_recall_{view.short_name}", report.classifier.recall[int(view)])
                )
        for key in sorted(report.settings):
            metrics.append((f"setting_{key}", report.settings[key]))
        return metrics

    def export_report(self, report, filename: str = "report.csv") -> Path:
        frame = pd.DataFrame(self.report_metrics(report), columns=["metric", "value"])
        return self._write(frame, filename)

    def export_confusion(self, confusion, filename: str = "confusion.csv") -> Path:
        names = [view.short_name for view in ViewLabel]
        frame = pd.DataFrame(confusion, index=pd.Index(names, name="true"), columns=names)
        return self._write(frame, filename, index=True)

    def export_samples(self, report, filename: str = "samples.csv") -> Path:
        frame = pd.DataFrame([row.as_row() for row in report.samples])
        return self._write(frame, filename)

    def export_report_files(self, report, prefix: Optional[str] = None) -> list[Path]:
        """report.csv, confusion.csv and samples.csv (plus the classifier confusion)."""
        prefix = f"{prefix}_" if prefix else ""
        paths = [
            self.export_report(report, f"{prefix}report.csv"),
            self.export_confusion(report.views.confusion, f"{prefix}confusion.csv"),
            self.export_samples(report, f"{prefix}samples.csv"),
        ]
        if report.classifier is not None:
            paths.append(
                self.export_confusion(report.classifier.confusion, f"{prefix}classifier_confusion.csv")
            )
        return paths

    def export_verification(self, summary, filename: str = "verification.csv") -> Path:
        frame = pd.DataFrame(
            [
                {
                    "suite": r.name,
                    "passed": r.passed,
                    "duration_seconds": r.duration,
                    "detail": r.detail,
                    "error": r.error or "",
                }
                for r in summary.results
            ]
        )
        return self._write(frame, filename)
