"""
Tests for dataset generation.

Verifies that:
1. Generation is deterministic and independent of the worker count
2. Stored ground truth matches the plane-frame coordinates of the pose
3. Sector masks and splits behave as documented
4. Sample files are read back faithfully and corrupt files are rejected
5. Augmentation stays in range and is reproducible

Author: EchoViews Contributors
License: MIT
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from dataset.augment import Augmenter
from dataset.generator import (
    GenerationSettings,
    assign_splits,
    generate_dataset,
    generate_sample,
    sample_id_for,
)
from dataset.sample import ViewSample, round_significant
from dataset.sample_io import (
    MANIFEST_NAME,
    load_split,
    read_manifest,
    read_pgm,
    read_sample,
    write_pgm,
    write_sample,
)
from meshing.correspondence import prepare_template_set
from meshing.phantom import generate_phantom
from utils.errors import ConfigError, DatasetFormatError
from views.frames import ViewLabel, place_in_image, standard_frame, to_plane_coords
from views.sampling import PoseSamplingLimits, ViewSamplingLimits

IMAGE_SIZE = 64
PER_VIEW = 4


@pytest.fixture(scope="module")
def meshes():
    phantoms = [generate_phantom(seed, detail=1) for seed in (0, 1)]
    _, corresponded = prepare_template_set(phantoms, phantoms[0].n_vertices)
    return corresponded


def _generate(meshes, out_dir, workers=1):
    return generate_dataset(
        meshes,
        per_view_count=PER_VIEW,
        limits=ViewSamplingLimits(),
        seed=7,
        image_size=IMAGE_SIZE,
        out_dir=out_dir,
        split_fractions={"train": 1.0},
        workers=workers,
    )


@pytest.fixture(scope="module")
def dataset_root(meshes, tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    _generate(meshes, root)
    return root


@pytest.fixture(scope="module")
def manifest(dataset_root):
    return read_manifest(dataset_root)


@pytest.fixture(scope="module")
def samples(dataset_root, manifest):
    return load_split(dataset_root, "train", manifest)


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestGenerateDataset:
    """Test whole-dataset generation."""

    def test_counts(self, manifest, dataset_root):
        assert manifest.n_samples == 2 * 4 * PER_VIEW
        assert len(manifest.splits["train"]) == 32
        assert manifest.splits["val"] == [] and manifest.splits["test"] == []
        assert len(list((dataset_root / "train").glob("sample_*.pgm"))) == 32
        assert len(list((dataset_root / "train").glob("sample_*.meta"))) == 32
        assert (dataset_root / MANIFEST_NAME).exists()

    def test_manifest_fields(self, manifest, meshes):
        assert manifest.n_vertices == meshes[0].n_vertices
        assert manifest.image_size == IMAGE_SIZE
        assert manifest.per_view_count == PER_VIEW
        assert set(manifest.mesh_splits.values()) == {"train"}

    def test_sample_ids(self, manifest):
        assert manifest.splits["train"][0] == "m000-a2ch-0000"
        assert "m001-aplax-0003" in manifest.splits["train"]
        assert sample_id_for(12, ViewLabel.A4CH, 7) == "m012-a4ch-0007"

    def test_deterministic(self, meshes, dataset_root, tmp_path):
        _generate(meshes, tmp_path)
        assert _tree_bytes(tmp_path) == _tree_bytes(dataset_root)

    @pytest.mark.slow
    def test_worker_count_does_not_matter(self, meshes, dataset_root, tmp_path):
        _generate(meshes, tmp_path, workers=2)
        assert _tree_bytes(tmp_path) == _tree_bytes(dataset_root)

    def test_no_meshes(self, tmp_path):
        with pytest.raises(ConfigError):
            generate_dataset([], 1, ViewSamplingLimits(), 0, IMAGE_SIZE, tmp_path)

    def test_per_view_count(self, meshes, tmp_path):
        with pytest.raises(ConfigError, match="per_view_count"):
            generate_dataset(meshes, 0, ViewSamplingLimits(), 0, IMAGE_SIZE, tmp_path)


class TestSamples:
    """Test the content of generated samples."""

    def test_ground_truth_matches_pose(self, samples, meshes):
        by_id = {m.mesh_id: m for m in meshes}
        for sample in samples:
            expected = to_plane_coords(by_id[sample.mesh_id].vertices, sample.pose)
            assert np.allclose(sample.gt_coords, expected, rtol=1e-8, atol=1e-6)

    def test_labels_in_range(self, samples):
        for sample in samples:
            assert sample.image.shape == (IMAGE_SIZE, IMAGE_SIZE)
            assert set(np.unique(sample.image)) <= {0, 1, 2, 3, 4}

    def test_heart_is_visible(self, samples):
        assert all(np.count_nonzero(s.image) > 0 for s in samples)

    def test_outside_sector_is_background(self, samples):
        for sample in samples:
            assert sample.sector is not None
            assert not sample.image[~sample.sector.mask(IMAGE_SIZE)].any()

    def test_views_follow_ids(self, samples):
        for sample in samples:
            assert sample.view.short_name in sample.sample_id

    def test_fixed_limits_give_standard_frame(self, meshes):
        limits = ViewSamplingLimits(per_view={v: PoseSamplingLimits.fixed() for v in ViewLabel})
        settings = GenerationSettings(image_size=IMAGE_SIZE, seed=3, limits=limits)
        sample = generate_sample(meshes[0], 0, ViewLabel.A4CH, 2, settings)
        expected = place_in_image(standard_frame(meshes[0], ViewLabel.A4CH), IMAGE_SIZE)
        assert np.allclose(sample.pose.rotation, expected.rotation)
        assert np.allclose(sample.pose.translation, expected.translation)

    def test_sample_is_reproducible(self, meshes):
        settings = GenerationSettings(image_size=IMAGE_SIZE, seed=3, limits=ViewSamplingLimits())
        a = generate_sample(meshes[1], 1, ViewLabel.A5CH, 0, settings)
        b = generate_sample(meshes[1], 1, ViewLabel.A5CH, 0, settings)
        assert np.array_equal(a.image, b.image)
        assert np.array_equal(a.gt_coords, b.gt_coords)

    def test_sector_can_be_disabled(self, meshes):
        settings = GenerationSettings(
            image_size=IMAGE_SIZE, seed=3, limits=ViewSamplingLimits(), sector_mask=False
        )
        assert generate_sample(meshes[0], 0, ViewLabel.A2CH, 0, settings).sector is None


class TestSplits:
    """Test mesh-level split assignment."""

    def test_default_fractions(self):
        ids = [f"mesh_{i}" for i in range(10)]
        assignment = assign_splits(ids, {"train": 0.8, "val": 0.1, "test": 0.1}, seed=0)
        counts = {s: list(assignment.values()).count(s) for s in ("train", "val", "test")}
        assert counts == {"train": 8, "val": 1, "test": 1}

    def test_seeded(self):
        ids = [f"mesh_{i}" for i in range(10)]
        fractions = {"train": 0.6, "val": 0.2, "test": 0.2}
        assert assign_splits(ids, fractions, 4) == assign_splits(ids, fractions, 4)

    def test_negative_fraction(self):
        with pytest.raises(ConfigError):
            assign_splits(["a"], {"train": 1.2, "val": -0.2}, 0)

    def test_sum_above_one(self):
        with pytest.raises(ConfigError):
            assign_splits(["a"], {"train": 0.8, "val": 0.3}, 0)

    def test_unknown_split(self):
        with pytest.raises(ConfigError, match="holdout"):
            assign_splits(["a"], {"train": 0.9, "holdout": 0.1}, 0)


class TestSampleFiles:
    """Test the PGM and metadata formats."""

    def test_round_trip(self, samples, tmp_path):
        sample = samples[5]
        write_sample(sample, tmp_path)
        again = read_sample(tmp_path, sample.sample_id)
        assert np.array_equal(again.image, sample.image)
        assert np.array_equal(again.gt_coords, sample.gt_coords)
        assert again.view == sample.view
        assert again.sector == sample.sector

    def test_pgm_header(self, tmp_path):
        path = tmp_path / "small.pgm"
        write_pgm(np.arange(16 * 16, dtype=np.uint8).reshape(16, 16), path)
        assert path.read_bytes().startswith(b"P5\n16 16\n255\n")
        assert read_pgm(path)[1, 0] == 16

    def test_truncated_pgm(self, tmp_path):
        path = tmp_path / "cut.pgm"
        write_pgm(np.zeros((16, 16), dtype=np.uint8), path)
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(DatasetFormatError, match="truncated"):
            read_pgm(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(DatasetFormatError, match="binary PGM"):
            read_pgm(path)

    def test_non_square_image(self, samples):
        sample = samples[0]
        with pytest.raises(DatasetFormatError, match="square"):
            ViewSample(
                sample_id="bad",
                mesh_id=sample.mesh_id,
                view=sample.view,
                image=np.zeros((16, 32), dtype=np.uint8),
                gt_coords=sample.gt_coords,
                pose=sample.pose,
            )

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="manifest"):
            read_manifest(tmp_path)

    def test_round_significant(self):
        assert round_significant(np.array([123.456789012345]))[0] == 123.456789
        assert round_significant(np.array([-0.000123456789876]))[0] == -0.000123456790


class TestAugmenter:
    """Test appearance augmentation."""

    def test_output_range(self):
        image = np.random.default_rng(0).integers(0, 5, size=(32, 32)) / 4.0
        rng = np.random.default_rng(1)
        augment = Augmenter(probability=1.0)
        for _ in range(10):
            result = augment(image, rng)
            assert result.shape == image.shape
            assert result.min() >= 0.0 and result.max() <= 1.0

    def test_reproducible(self):
        image = np.full((16, 16), 0.5)
        a = Augmenter()(image, np.random.default_rng(9))
        b = Augmenter()(image, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_zero_probability_is_identity(self):
        image = np.random.default_rng(0).integers(0, 5, size=(16, 16)) / 4.0
        assert np.array_equal(Augmenter(probability=0.0)(image, np.random.default_rng(2)), image)
