"""
Tests for the image-to-mesh network.

Verifies that:
1. Spirals follow the oriented one-rings and pad with the sentinel
2. Spiral convolution gathers in spiral order and commutes with relabelling
3. Every layer's backward pass agrees with central differences
4. Losses, Adam and checkpoints behave as documented
5. Training is seeded, reduces the loss, can memorise a sample and keeps the best weights

Author: EchoViews Contributors
License: MIT
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from dataset.generator import GenerationSettings, generate_sample
from evaluation.report import build_report
from meshing.adjacency import build_adjacency
from meshing.mesh import StructureId
from meshing.phantom import generate_phantom
from network.checkpoint import load_checkpoint, read_header, save_checkpoint
from network.classifier import load_classifier, train_classifier
from network.gradcheck import check_gradients
from network.losses import cross_entropy_loss, l2_loss
from network.model import GcnModel, build_encoder, prepare_images
from network.optim import Adam, AdamConfig, adam_step
from network.spiral_conv import SpiralConv
from network.spirals import SpiralIndex, build_spirals, pad_spirals
from network.train import TrainConfig, evaluate_loss, train
from utils.errors import ConfigError, DatasetFormatError, NumericalError, ShapeError, SpiralError
from verification.suites import GradientCheckSuite
from views.frames import ViewLabel
from views.markers import encode_all_markers
from views.sampling import ViewSamplingLimits

TETRAHEDRON = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
TETRAHEDRON_ADJACENCY = [np.array([1, 2, 3]), np.array([0, 2, 3]), np.array([0, 1, 3]), np.array([0, 1, 2])]
GRADCHECK_LABELS = ["conv", "pool", "compression", "spiral", "spiral-mlp", "elu", "head", "model"]

SMALL_ARCHITECTURE = dict(channel_plan=(4, 4), encoder_channels=(4, 4, 4, 4, 4))


@pytest.fixture(scope="module")
def mesh():
    return generate_phantom(0, detail=1)


@pytest.fixture(scope="module")
def spirals(mesh):
    return build_spirals(build_adjacency(mesh), mesh.faces, 9)


@pytest.fixture(scope="module")
def gradcheck_cases():
    rng = np.random.default_rng(0)
    return {label: (label, layer, x, tol) for label, layer, x, tol in GradientCheckSuite().cases(rng)}


@pytest.fixture(scope="module")
def samples(mesh):
    settings = GenerationSettings(image_size=32, seed=0, limits=ViewSamplingLimits())
    return [generate_sample(mesh, 0, view, i, settings) for view in ViewLabel for i in range(2)]


def _small_config(**overrides) -> TrainConfig:
    values = dict(
        learning_rate=1e-2,
        batch_size=4,
        epochs=15,
        seed=2,
        precision="float64",
        spiral_length=9,
        **SMALL_ARCHITECTURE,
    )
    values.update(overrides)
    return TrainConfig(**values)


class TestSpirals:
    """Test spiral construction."""

    def test_tetrahedron_exact_length(self):
        result = build_spirals(TETRAHEDRON_ADJACENCY, TETRAHEDRON, 4)
        assert result.pad_index == 4
        assert result.indices[0].tolist() == [0, 1, 2, 3]
        assert not np.any(result.indices == 4)

    def test_tetrahedron_padding(self):
        result = build_spirals(TETRAHEDRON_ADJACENCY, TETRAHEDRON, 6)
        for row in result.indices:
            assert sorted(row[:4].tolist()) == [0, 1, 2, 3]
            assert row[4:].tolist() == [4, 4]

    def test_rows_start_with_vertex(self, spirals):
        assert np.array_equal(spirals.indices[:, 0], np.arange(spirals.n_vertices))

    def test_first_ring_is_adjacency(self, mesh, spirals):
        for vertex, neighbours in enumerate(build_adjacency(mesh)):
            ring = spirals.indices[vertex, 1 : 1 + len(neighbours)]
            assert sorted(ring.tolist()) == neighbours.tolist()
            assert ring[0] == neighbours.min()

    def test_no_repeats(self, spirals):
        for row in spirals.indices:
            real = row[row != spirals.pad_index]
            assert len(set(real.tolist())) == len(real)

    def test_open_surface(self):
        with pytest.raises(SpiralError, match="boundary"):
            build_spirals(TETRAHEDRON_ADJACENCY, TETRAHEDRON[1:], 4)

    def test_length_too_small(self):
        with pytest.raises(ValueError):
            build_spirals(TETRAHEDRON_ADJACENCY, TETRAHEDRON, 1)

    def test_pad_spirals(self, spirals):
        longer = pad_spirals(spirals, 12)
        assert longer.length == 12
        assert np.all(longer.indices[:, 9:] == spirals.pad_index)


class TestSpiralConv:
    """Test the spiral convolution layer."""

    def test_shapes(self, spirals):
        conv = SpiralConv(3, 5, spirals, np.random.default_rng(0))
        out = conv.forward(np.ones((2, spirals.n_vertices, 3)))
        assert out.shape == (2, spirals.n_vertices, 5)

    def test_centre_slot_identity(self, spirals):
        channels = 3
        conv = SpiralConv(channels, channels, spirals, np.random.default_rng(0))
        weight = np.zeros((channels * spirals.length, channels))
        weight[:channels] = np.eye(channels)
        conv.stages[0].params["weight"] = weight
        conv.stages[0].params["bias"] = np.zeros(channels)
        x = np.random.default_rng(1).standard_normal((2, spirals.n_vertices, channels))
        assert np.allclose(conv.forward(x), x)

    def test_gather_uses_zero_padding(self):
        spirals = build_spirals(TETRAHEDRON_ADJACENCY, TETRAHEDRON, 6)
        conv = SpiralConv(1, 1, spirals, np.random.default_rng(0))
        gathered = conv.gather(np.arange(1.0, 5.0).reshape(1, 4, 1))
        assert gathered.shape == (1, 4, 6)
        assert np.all(gathered[0, :, 4:] == 0.0)
        assert gathered[0, 2, 0] == 3.0

    def test_relabelling_equivariance(self, spirals):
        n = spirals.n_vertices
        perm = np.random.default_rng(3).permutation(n)
        inverse = np.empty(n, dtype=np.int64)
        inverse[perm] = np.arange(n)
        mapping = np.append(inverse, n)
        relabelled = SpiralIndex(indices=mapping[spirals.indices[perm]], pad_index=n)

        original = SpiralConv(2, 4, spirals, np.random.default_rng(5))
        permuted = SpiralConv(2, 4, relabelled, np.random.default_rng(5))
        x = np.random.default_rng(6).standard_normal((1, n, 2))
        assert np.allclose(permuted.forward(x[:, perm]), original.forward(x)[:, perm])

    def test_wrong_vertex_count(self, spirals):
        conv = SpiralConv(2, 2, spirals, np.random.default_rng(0))
        with pytest.raises(ShapeError):
            conv.forward(np.zeros((1, spirals.n_vertices + 1, 2)))

    def test_extra_sentinel_slots_are_neutral(self, spirals):
        channels, extra = 3, 3
        conv = SpiralConv(channels, 5, spirals, np.random.default_rng(0))
        padded = pad_spirals(spirals, spirals.length + extra)
        longer = SpiralConv(channels, 5, padded, np.random.default_rng(1))
        weight = conv.stages[0].params["weight"]
        longer.stages[0].params["weight"] = np.vstack([weight, np.zeros((extra * channels, 5))])
        longer.stages[0].params["bias"] = conv.stages[0].params["bias"].copy()
        x = np.random.default_rng(2).standard_normal((2, spirals.n_vertices, channels))
        assert np.allclose(longer.forward(x), conv.forward(x), rtol=0.0, atol=1e-12)

    def test_mlp_depth(self, spirals):
        with pytest.raises(ValueError):
            SpiralConv(2, 2, spirals, np.random.default_rng(0), mlp_depth=0)
        assert len(SpiralConv(2, 2, spirals, np.random.default_rng(0), mlp_depth=2).stages) == 3


class TestGradients:
    """Backward passes against central differences in float64."""

    @pytest.mark.parametrize("label", GRADCHECK_LABELS)
    def test_layer(self, gradcheck_cases, label):
        _, layer, x, tolerance = gradcheck_cases[label]
        layer.astype(np.float64)
        result = check_gradients(layer, x, np.random.default_rng(11), n_params=20)
        assert result.passed(tolerance), f"{label}: {result.max_relative_error:.3g} at {result.worst_entry}"


class TestModel:
    """Test the full image-to-mesh model."""

    def test_zero_image_encodes_to_zero(self):
        encoder = build_encoder((4, 8), np.random.default_rng(0))
        assert not encoder.forward(np.zeros((1, 1, 32, 32))).any()

    def test_blank_image_gives_head_bias(self, spirals):
        model = GcnModel(spirals, 32, seed=0, dtype=np.float64, **SMALL_ARCHITECTURE)
        out = model.forward(prepare_images(np.zeros((1, 32, 32), dtype=np.uint8), np.float64))
        assert out.shape == (1, spirals.n_vertices, 3)
        assert np.allclose(out, [0.5, 0.5, 0.0])

    def test_predict_in_pixels(self, spirals):
        model = GcnModel(spirals, 32, seed=0, dtype=np.float64, **SMALL_ARCHITECTURE)
        images = np.zeros((2, 32, 32), dtype=np.uint8)
        raw = model.forward(prepare_images(images, np.float64))
        assert np.allclose(model.predict(images), raw * 32)

    def test_prepare_images_scale(self):
        images = np.array([[[0, 4], [2, 1]]], dtype=np.uint8)
        assert np.allclose(prepare_images(images)[0, 0], [[0.0, 1.0], [0.5, 0.25]])

    def test_elu_only_between_spiral_layers(self, spirals):
        model = GcnModel(spirals, 32, channel_plan=(4, 8, 6), encoder_channels=(4, 4))
        kinds = [type(layer).__name__ for layer in model.decoder.layers]
        assert kinds == ["SpiralConv", "ELU", "SpiralConv", "ELU", "SpiralConv"]

    def test_wrong_image_size(self, spirals):
        model = GcnModel(spirals, 32, **SMALL_ARCHITECTURE)
        with pytest.raises(ShapeError):
            model.forward(np.zeros((1, 1, 16, 16), dtype=np.float32))


class TestLosses:
    def test_l2_unit_vectors(self):
        loss, grad = l2_loss(np.zeros((5, 3)), np.ones((5, 3)))
        assert loss == pytest.approx(3.0)
        assert np.allclose(grad, -2.0 / 5)

    def test_l2_unit_offset(self):
        gt = np.random.default_rng(0).standard_normal((2, 7, 3))
        loss, _ = l2_loss(gt + np.array([1.0, 0.0, 0.0]), gt)
        assert loss == pytest.approx(1.0)

    def test_l2_matches_summed_squares(self):
        rng = np.random.default_rng(5)
        pred, gt = rng.standard_normal((2, 3, 11, 3))
        expected = sum(float(np.sum((p - g) ** 2)) for p, g in zip(pred, gt)) / (3 * 11)
        assert l2_loss(pred, gt)[0] == pytest.approx(expected)

    def test_l2_shape_mismatch(self):
        with pytest.raises(ShapeError):
            l2_loss(np.zeros((4, 3)), np.zeros((5, 3)))

    def test_cross_entropy_uniform(self):
        loss, grad = cross_entropy_loss(np.zeros((3, 4)), np.array([0, 1, 3]))
        assert loss == pytest.approx(np.log(4.0))
        assert np.allclose(grad.sum(axis=1), 0.0)


class TestAdam:
    """Test the Adam update."""

    def test_first_step_moves_by_learning_rate(self):
        params = {"w": np.array([1.0, -2.0, 0.5])}
        grads = {"w": np.array([0.3, -40.0, 1e-3])}
        adam_step(params, grads, AdamConfig(learning_rate=0.01, epsilon=0.0))
        assert params["w"].dtype == np.float64
        assert np.allclose(params["w"], [0.99, -1.99, 0.49], rtol=0.0, atol=1e-12)

    def test_epsilon_outside_square_root(self):
        params = {"w": np.array([1.0])}
        adam_step(params, {"w": np.array([1e-8])}, AdamConfig(learning_rate=0.01, epsilon=1e-8))
        assert params["w"][0] == pytest.approx(1.0 - 0.005, rel=0.0, abs=1e-12)

    def test_zero_gradient(self):
        params = {"w": np.array([1.0, 2.0])}
        Adam().step(params, {"w": np.zeros(2)})
        assert np.array_equal(params["w"], [1.0, 2.0])

    def test_updates_in_place(self):
        weight = np.ones(3)
        optimizer = Adam(AdamConfig(learning_rate=0.1))
        optimizer.step({"w": weight}, {"w": np.ones(3)})
        optimizer.step({"w": weight}, {"w": np.ones(3)})
        assert optimizer.step_count == 2
        assert np.allclose(weight, 0.8, atol=1e-6)

    def test_quadratic_descent(self):
        x = np.zeros(1)
        optimizer = Adam(AdamConfig(learning_rate=0.01))
        distances = []
        for _ in range(100):
            optimizer.step({"x": x}, {"x": 2.0 * (x - 10.0)})
            distances.append(abs(float(x[0]) - 10.0))
        assert all(b < a for a, b in zip(distances[5:], distances[6:]))
        assert 0.8 < x[0] < 1.05

    def test_non_finite_gradient(self):
        params = {"a": np.ones(2), "b": np.ones(2)}
        with pytest.raises(NumericalError, match="'b'"):
            Adam().step(params, {"a": np.ones(2), "b": np.array([1.0, np.nan])})
        assert np.array_equal(params["a"], [1.0, 1.0])


class TestCheckpoint:
    """Test checkpoint archives."""

    def test_round_trip(self, spirals, tmp_path):
        model = GcnModel(spirals, 32, seed=4, dtype=np.float64, **SMALL_ARCHITECTURE)
        model.head.params["bias"][...] = [0.1, 0.2, 0.3]
        path = save_checkpoint(model, tmp_path / "model.npz", {"epoch": 3})
        loaded = load_checkpoint(path, spirals, dtype=np.float64)
        images = np.random.default_rng(0).integers(0, 5, size=(2, 32, 32))
        assert np.array_equal(loaded.predict(images), model.predict(images))
        assert read_header(path)["extra"] == {"epoch": 3}

    def test_spiral_mismatch(self, spirals, tmp_path):
        path = save_checkpoint(GcnModel(spirals, 32, **SMALL_ARCHITECTURE), tmp_path / "model.npz")
        with pytest.raises(DatasetFormatError, match="l=12"):
            load_checkpoint(path, pad_spirals(spirals, 12))

    def test_wrong_kind(self, spirals, tmp_path):
        path = save_checkpoint(GcnModel(spirals, 32, **SMALL_ARCHITECTURE), tmp_path / "model.npz")
        with pytest.raises(DatasetFormatError, match="classifier"):
            load_classifier(path)


class TestTraining:
    """Test the training loop."""

    def test_loss_decreases(self, samples, spirals):
        result = train(samples, spirals, _small_config())
        assert len(result.history) == 15
        assert result.history[-1].train_loss < result.history[0].train_loss
        assert result.steps == 15 * 2

    def test_deterministic(self, samples, spirals):
        first = train(samples, spirals, _small_config(epochs=3))
        second = train(samples, spirals, _small_config(epochs=3))
        assert [r.train_loss for r in first.history] == [r.train_loss for r in second.history]

    def test_max_steps(self, samples, spirals):
        result = train(samples, spirals, _small_config(epochs=10, max_steps=3))
        assert result.steps == 3
        assert len(result.history) == 2

    def test_best_model_saved(self, samples, spirals, tmp_path):
        path = tmp_path / "best.npz"
        result = train(samples, spirals, _small_config(epochs=2), val_samples=samples[:2], checkpoint_path=path)
        assert path.exists()
        assert read_header(path, kind="gcn")["extra"]["epoch"] == result.best_epoch

    def test_returns_best_weights(self, samples, spirals, tmp_path):
        path = tmp_path / "best.npz"
        result = train(
            samples[:4],
            spirals,
            _small_config(epochs=12, learning_rate=5e-2),
            val_samples=samples[4:],
            checkpoint_path=path,
        )
        assert evaluate_loss(result.model, samples[4:]) == pytest.approx(result.best_loss, rel=1e-12)
        images = np.stack([s.image for s in samples])
        saved = load_checkpoint(path, spirals, dtype=np.float64)
        assert np.array_equal(saved.predict(images), result.model.predict(images))

    def test_memorizes_single_sample(self, samples, spirals):
        result = train([samples[0]], spirals, _small_config(epochs=500, batch_size=1, learning_rate=5e-3))
        assert result.steps == 500
        assert result.best_loss < 1e-3

    @pytest.mark.slow
    def test_smoothed_loss_non_increasing(self, mesh, spirals):
        settings = GenerationSettings(image_size=32, seed=3, limits=ViewSamplingLimits())
        larger = [generate_sample(mesh, 0, view, i, settings) for view in ViewLabel for i in range(8)]
        result = train(larger, spirals, _small_config(epochs=40, batch_size=8, learning_rate=1e-3))
        losses = np.array([r.train_loss for r in result.history])
        blocks = losses.reshape(4, 10).mean(axis=1)
        assert np.all(blocks[1:] <= blocks[:-1] * 1.01)
        assert blocks[-1] < blocks[0]

    @pytest.mark.slow
    def test_overfit_reaches_report_targets(self, mesh, samples, spirals):
        subset = samples[::2]
        result = train(subset, spirals, _small_config(epochs=1500, batch_size=4, learning_rate=1e-3))
        images = np.stack([s.image for s in subset])
        report = build_report(
            subset, list(result.model.predict(images)), encode_all_markers(mesh), mesh.structure_of_vertex
        )
        assert report.mkpts_mean < 5.0
        assert report.miou[StructureId.LV] >= 0.8
        assert report.miou[StructureId.LA] >= 0.8

    def test_empty_training_set(self, spirals):
        with pytest.raises(ConfigError, match="empty"):
            train([], spirals, _small_config())

    def test_invalid_config(self):
        with pytest.raises(ConfigError, match="learning_rate"):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ConfigError, match="precision"):
            TrainConfig(precision="float16")

    def test_classifier(self, samples, tmp_path):
        path = tmp_path / "classifier.npz"
        model, losses = train_classifier(samples, _small_config(epochs=2), checkpoint_path=path)
        assert len(losses) == 2
        images = np.stack([s.image for s in samples])
        assert np.array_equal(load_classifier(path, dtype=np.float64).predict(images), model.predict(images))
