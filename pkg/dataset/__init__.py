"""
EchoViews - Dataset modules.

View samples and manifests, their on-disk format, the seeded generator and
appearance augmentation.
"""

from .sample import DatasetManifest, ViewSample
from .sample_io import load_split, read_manifest, read_sample, write_manifest, write_sample
from .generator import GenerationSettings, assign_splits, generate_dataset, generate_sample
from .augment import Augmenter

__all__ = [
    "DatasetManifest",
    "ViewSample",
    "load_split",
    "read_manifest",
    "read_sample",
    "write_manifest",
    "write_sample",
    "GenerationSettings",
    "assign_splits",
    "generate_dataset",
    "generate_sample",
    "Augmenter",
]
