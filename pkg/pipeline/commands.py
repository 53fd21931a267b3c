"""
Pipeline commands behind the `echoview` subcommands.

Each command takes the effective RunConfig, reads the artifacts of the
previous stage below `output_root`, writes its own and returns a result
object for display:

    prepare   meshes/       template.obj, <mesh_id>.obj, meshes.json
    generate  dataset/      manifest.json, <split>/sample_<id>.pgm|.meta
    train     model/        checkpoint.npz, loss_curve.csv|.png, run.json
    eval      eval/         report.csv|.txt, confusion.csv|.png, samples.csv, overlays.png
    verify    verify/       verification.csv

Author: EchoViews Contributors
License: MIT
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from dataset.generator import generate_dataset
from dataset.sample import DatasetManifest
from dataset.sample_io import load_split, read_manifest
from evaluation.report import EvalReport, build_report
from meshing.adjacency import build_adjacency
from meshing.correspondence import prepare_template_set
from meshing.mesh import AnatomicalMesh, CorrespondedMesh, topology_hash
from meshing.mesh_io import load_mesh, save_mesh
from meshing.phantom import generate_phantom
from network.checkpoint import load_checkpoint, read_header
from network.classifier import load_classifier, train_classifier
from network.spirals import SpiralIndex, build_spirals
from network.train import TrainResult, train
from output.console_formatter import ConsoleFormatter
from output.csv_exporter import CSVExporter
from output.visualizer import Visualizer
from utils.config import RunConfig
from utils.errors import ConfigError, DataError, DatasetFormatError
from verification.runner import VerificationRunner, VerificationSummary, default_suites
from views.markers import encode_all_markers

logger = logging.getLogger(__name__)

MESH_INDEX_NAME = "meshes.json"


@dataclass
class PrepareResult:
    template: AnatomicalMesh
    meshes: list[CorrespondedMesh]
    topology_id: str
    files: list[Path] = field(default_factory=list)


@dataclass
class TrainOutcome:
    result: TrainResult
    classifier_losses: Optional[list[float]] = None
    files: list[Path] = field(default_factory=list)


@dataclass
class EvalOutcome:
    report: EvalReport
    files: list[Path] = field(default_factory=list)


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def source_meshes(config: RunConfig) -> list[AnatomicalMesh]:
    """Phantoms seeded from the master seed, or the configured mesh files."""
    if config.meshes.source == "phantom":
        return [
            generate_phantom(config.seed + i, detail=config.meshes.phantom_detail)
            for i in range(config.meshes.count)
        ]
    return [load_mesh(path) for path in config.meshes.paths]


def cmd_prepare(config: RunConfig) -> PrepareResult:
    """
    Build the template and the corresponded meshes.

    Raises:
        MeshParseError: A mesh file is malformed (message carries file and line)
        DownsampleError: The template budget cannot keep the chambers closed
        CorrespondenceError: A mesh lacks a structure of the template
    """
    template, meshes = prepare_template_set(source_meshes(config), config.meshes.template_vertices)
    topology_id = topology_hash(template)

    directory = config.paths.meshes
    directory.mkdir(parents=True, exist_ok=True)
    for stale in directory.glob("*.obj"):
        stale.unlink()
    for stale in directory.glob("*.landmarks.json"):
        stale.unlink()

    save_mesh(template, config.paths.template)
    files = [config.paths.template]
    names = []
    for mesh in meshes:
        path = directory / f"{mesh.mesh_id}.obj"
        save_mesh(mesh, path)
        files.append(path)
        names.append(path.name)
    index = {
        "config": config.to_dict(),
        "meshes": names,
        "seed": config.seed,
        "template": config.paths.template.name,
        "template_topology_id": topology_id,
        "n_vertices": template.n_vertices,
    }
    files.append(_write_json(directory / MESH_INDEX_NAME, index))
    logger.info("wrote template and %d mesh(es) to %s", len(meshes), directory)
    return PrepareResult(template, meshes, topology_id, files)


def load_prepared(config: RunConfig) -> tuple[AnatomicalMesh, list[CorrespondedMesh]]:
    """
    Read the output of `prepare`.

    Raises:
        DataError: If `prepare` has not been run
        DatasetFormatError: If a mesh does not match the template topology
    """
    index_path = config.paths.meshes / MESH_INDEX_NAME
    if not index_path.exists() or not config.paths.template.exists():
        raise DataError(f"no prepared template in {config.paths.meshes}; run 'echoview prepare' first")
    index = json.loads(index_path.read_text(encoding="utf-8"))
    template = load_mesh(config.paths.template)
    topology_id = topology_hash(template)
    if topology_id != index["template_topology_id"]:
        raise DatasetFormatError(f"{config.paths.template}: topology differs from {index_path}")

    meshes = []
    for name in index["meshes"]:
        mesh = load_mesh(config.paths.meshes / name)
        if topology_hash(mesh) != topology_id:
            raise DatasetFormatError(f"{name}: not on the template topology")
        meshes.append(
            CorrespondedMesh(
                vertices=mesh.vertices,
                faces=mesh.faces,
                structure_of_vertex=mesh.structure_of_vertex,
                landmarks=mesh.landmarks,
                mesh_id=mesh.mesh_id,
                template_topology_id=topology_id,
            )
        )
    return template, meshes


def cmd_generate(config: RunConfig) -> DatasetManifest:
    """Generate the dataset from the prepared meshes."""
    _, meshes = load_prepared(config)
    return generate_dataset(
        meshes=meshes,
        per_view_count=config.dataset.per_view_count,
        limits=config.sampling,
        seed=config.seed,
        image_size=config.dataset.image_size,
        out_dir=config.paths.dataset,
        split_fractions=config.dataset.split_fractions,
        workers=config.workers,
        angles=config.views.angles,
        field_of_view_mm=config.dataset.field_of_view_mm,
        sector_mask=config.dataset.sector_mask,
    )


def _load_dataset(config: RunConfig) -> tuple[AnatomicalMesh, DatasetManifest]:
    template = load_mesh(config.paths.template) if config.paths.template.exists() else None
    if template is None:
        raise DataError(f"no prepared template in {config.paths.meshes}; run 'echoview prepare' first")
    manifest = read_manifest(config.paths.dataset)
    if manifest.template_topology_id != topology_hash(template):
        raise DatasetFormatError(
            f"{config.paths.dataset}: dataset was generated for another template topology"
        )
    return template, manifest


def template_spirals(template: AnatomicalMesh, length: int) -> SpiralIndex:
    return build_spirals(build_adjacency(template), template.faces, length)


def cmd_train(config: RunConfig) -> TrainOutcome:
    """
    Train the mesh model (and the baseline classifier when enabled).

    Raises:
        ConfigError: If the training split is empty
        NumericalError: On a non-finite loss or gradient
    """
    template, manifest = _load_dataset(config)
    train_samples = load_split(config.paths.dataset, "train", manifest)
    val_samples = load_split(config.paths.dataset, "val", manifest)
    if not train_samples:
        raise ConfigError("the 'train' split is empty; adjust dataset.split_fractions")
    if not val_samples:
        logger.warning("validation split is empty; the best checkpoint is chosen by training loss")

    spirals = template_spirals(template, config.train.spiral_length)
    model_dir = config.paths.model
    model_dir.mkdir(parents=True, exist_ok=True)
    result = train(train_samples, spirals, config.train, val_samples, config.paths.checkpoint)

    files = [config.paths.checkpoint]
    files.append(CSVExporter(model_dir).export_loss_curve(result.history))
    plot = Visualizer(model_dir).plot_loss_curve(result.history)
    if plot is not None:
        files.append(plot)

    classifier_losses = None
    if config.train.baseline_classifier:
        _, classifier_losses = train_classifier(train_samples, config.train, config.paths.classifier)
        files.append(config.paths.classifier)

    files.append(
        _write_json(
            model_dir / "run.json",
            {
                "best_epoch": result.best_epoch,
                "best_loss": result.best_loss,
                "config": config.to_dict(),
                "seed": config.seed,
                "steps": result.steps,
            },
        )
    )
    return TrainOutcome(result, classifier_losses, files)


def cmd_eval(config: RunConfig, gt_as_prediction: Optional[bool] = None) -> EvalOutcome:
    """
    Evaluate the trained model (or the ground truth itself) on one split.

    Args:
        config: Effective configuration
        gt_as_prediction: Overrides `eval.gt_as_prediction`

    Raises:
        ConfigError: If the split is empty
        DataError: If no checkpoint exists
    """
    use_gt = config.eval.gt_as_prediction if gt_as_prediction is None else gt_as_prediction
    template, manifest = _load_dataset(config)
    split = config.eval.split
    samples = load_split(config.paths.dataset, split, manifest)
    if not samples:
        raise ConfigError(f"the '{split}' split is empty; choose another eval.split")

    markers = encode_all_markers(template, config.views.marker_epsilon, config.views.angles)
    images = np.stack([s.image for s in samples])
    if use_gt:
        predictions = [s.gt_coords for s in samples]
    else:
        if not config.paths.checkpoint.exists():
            raise DataError(f"no checkpoint at {config.paths.checkpoint}; run 'echoview train' first")
        header = read_header(config.paths.checkpoint, kind="gcn")
        spirals = template_spirals(template, header["model"]["spiral_length"])
        model = load_checkpoint(config.paths.checkpoint, spirals, config.train.dtype)
        predictions = list(model.predict(images))

    classifier_views = None
    if config.train.baseline_classifier and config.paths.classifier.exists():
        classifier_views = load_classifier(config.paths.classifier, config.train.dtype).predict(images)

    report = build_report(
        samples,
        predictions,
        markers,
        template.structure_of_vertex,
        config.views.view_lambda,
        classifier_views,
        settings={"seed": config.seed, "split": split, "gt_as_prediction": use_gt},
    )

    out_dir = config.paths.evaluation
    exporter = CSVExporter(out_dir)
    files = exporter.export_report_files(report)
    text_path = out_dir / "report.txt"
    text_path.write_text(ConsoleFormatter(use_rich=False).format_report_as_string(report), encoding="utf-8")
    files.append(text_path)

    visualizer = Visualizer(out_dir)
    plots = [visualizer.plot_confusion(report.views.confusion)]
    if config.eval.overlays:
        plots.append(
            visualizer.plot_overlays(
                report,
                {s.sample_id: s.image for s in samples},
                {s.sample_id: p for s, p in zip(samples, predictions)},
            )
        )
    files.extend(p for p in plots if p is not None)
    return EvalOutcome(report, files)


def cmd_verify(config: RunConfig) -> VerificationSummary:
    """Run the oracle suites and write verification.csv."""
    summary = VerificationRunner().run_all(default_suites(config.seed))
    CSVExporter(config.paths.verification).export_verification(summary)
    return summary
