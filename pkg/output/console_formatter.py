"""
Console output formatter.

Displays verification summaries, evaluation reports, dataset manifests and
training summaries as tables in the terminal.

Author: EchoViews Contributors
License: MIT
"""

from typing import Sequence

import numpy as np

from utils.console import get_console
from utils.constants import CONSOLE_TABLE_FORMAT
from views.frames import ViewLabel

try:
    from tabulate import tabulate
    TABULATE_AVAILABLE = True
except ImportError:
    TABULATE_AVAILABLE = False

try:
    from rich.panel import Panel
    from rich.table import Table
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

Row = Sequence[object]


def _fmt(value: float, digits: int = 3) -> str:
    if value is None or (isinstance(value, float) and not np.isfinite(value)):
        return "n/a"
    return f"{value:.{digits}f}"


class ConsoleFormatter:
    """
    Formats and displays EchoViews results in the console.

    Supports multiple output styles:
    - Rich tables (colored, styled) if rich is available
    - Tabulate tables (clean ASCII) if tabulate is available
    - Basic fallback if neither is available
    """

    def __init__(self, use_rich: bool = True):
        self.use_rich = use_rich and RICH_AVAILABLE

    # Generic rendering

    def _show(self, title: str, headers: Row, rows: Sequence[Row], notes: Sequence[str] = ()) -> None:
        if self.use_rich:
            self._show_rich(title, headers, rows, notes)
        else:
            print(self._as_text(title, headers, rows, notes))

    def _show_rich(self, title: str, headers: Row, rows: Sequence[Row], notes: Sequence[str]) -> None:
        console = get_console()
        console.print()
        console.print(Panel.fit(f"[bold cyan]{title}[/bold cyan]", border_style="cyan"))
        table = Table(show_header=True, header_style="bold magenta")
        for i, header in enumerate(headers):
            table.add_column(str(header), justify="left" if i == 0 else "right")
        for row in rows:
            table.add_row(*[str(cell) for cell in row])
        console.print(table)
        for note in notes:
            console.print(f"[dim]{note}[/dim]")

    def _as_text(self, title: str, headers: Row, rows: Sequence[Row], notes: Sequence[str]) -> str:
        lines = ["", "=" * 72, f"  {title}", "=" * 72, ""]
        if TABULATE_AVAILABLE:
            lines.append(tabulate(rows, headers=headers, tablefmt=CONSOLE_TABLE_FORMAT))
        else:
            widths = [
                max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
                for i, h in enumerate(headers)
            ]
            lines.append("  ".join(str(h).ljust(w) for h, w in zip(headers, widths)))
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
            for row in rows:
                lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
        lines.extend(["", *notes])
        return "\n".join(lines)

    # Verification

    def _verification_table(self, summary) -> tuple[list[str], list[list]]:
        headers = ["Suite", "Status", "Time (s)", "Detail"]
        rows = [
            [r.name, "OK" if r.passed else "FAILED", f"{r.duration:.1f}", r.error or r.detail]
            for r in summary.results
        ]
        return headers, rows

    def display_verification(self, summary) -> None:
        headers, rows = self._verification_table(summary)
        verdict = "all suites passed" if summary.passed else f"{len(summary.failures())} suite(s) failed"
        self._show(
            "EchoViews Verification",
            headers,
            rows,
            [f"{verdict}; total time {summary.total_duration:.1f}s"],
        )

    # Evaluation

    def _view_rows(self, metrics) -> list[list]:
        rows = []
        for view in ViewLabel:
            rows.append(
                [
                    view.short_name,
                    int(metrics.confusion[int(view)].sum()),
                    _fmt(metrics.precision[int(view)]),
                    _fmt(metrics.recall[int(view)]),
                ]
            )
        return rows

    def _structure_rows(self, report) -> list[list]:
        return [
            [s.name, _fmt(report.miou[s]), report.missing_gt[s], report.missing_pred[s]]
            for s in report.miou
        ]

    def _report_notes(self, report) -> list[str]:
        notes = [
            f"samples: {report.n_samples}",
            f"weighted view accuracy: {_fmt(report.views.weighted_accuracy)}",
            f"mkptsErr: {_fmt(report.mkpts_mean, 2)} +- {_fmt(report.mkpts_std, 2)} % of image size",
        ]
        if report.classifier is not None:
            notes.append(
                f"baseline classifier accuracy: {_fmt(report.classifier.weighted_accuracy)}"
            )
        return notes

    def display_report(self, report) -> None:
        self._show(
            "View recognition", ["View", "Support", "Precision", "Recall"], self._view_rows(report.views)
        )
        if report.classifier is not None:
            self._show(
                "Baseline classifier",
                ["View", "Support", "Precision", "Recall"],
                self._view_rows(report.classifier),
            )
        self._show(
            "Structure boxes",
            ["Structure", "mIoU", "GT missing", "Pred missing"],
            self._structure_rows(report),
            self._report_notes(report),
        )

    def format_report_as_string(self, report) -> str:
        """Plain-text report, as written to report.txt."""
        parts = [
            self._as_text(
                "View recognition", ["View", "Support", "Precision", "Recall"], self._view_rows(report.views), []
            ),
            self._as_text(
                "Confusion (rows true, columns predicted)",
                ["true \\ pred", *[v.short_name for v in ViewLabel]],
                [[v.short_name, *report.views.confusion[int(v)].tolist()] for v in ViewLabel],
                [],
            ),
        ]
        if report.classifier is not None:
            parts.append(
                self._as_text(
                    "Baseline classifier",
                    ["View", "Support", "Precision", "Recall"],
                    self._view_rows(report.classifier),
                    [],
                )
            )
        parts.append(
            self._as_text(
                "Structure boxes",
                ["Structure", "mIoU", "GT missing", "Pred missing"],
                self._structure_rows(report),
                self._report_notes(report),
            )
        )
        return "\n".join(parts) + "\n"

    # Dataset and training

    def display_manifest(self, manifest) -> None:
        rows = [[split, len(ids)] for split, ids in manifest.splits.items()]
        notes = [
            f"template {manifest.template_topology_id[:12]}..., N={manifest.n_vertices}",
            f"image size {manifest.image_size}, seed {manifest.seed}, "
            f"{manifest.per_view_count} per mesh and view",
        ]
        self._show("EchoViews Dataset", ["Split", "Samples"], rows, notes)

    def display_training(self, result, every: int = 1) -> None:
        rows = [
            [r.epoch, r.steps, f"{r.train_loss:.6g}", _fmt(r.val_loss, 6)]
            for r in result.history
            if r.epoch % every == 0 or r.epoch == result.history[-1].epoch
        ]
        notes = [f"best epoch {result.best_epoch} (loss {result.best_loss:.6g}), {result.steps} steps"]
        self._show("EchoViews Training", ["Epoch", "Steps", "Train loss", "Val loss"], rows, notes)
