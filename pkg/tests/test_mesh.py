"""
Tests for the mesh core.

Verifies that:
1. Phantoms are valid, seeded and share one topology
2. Invariant violations are reported
3. OBJ files round-trip and parse errors carry their location
4. Downsampling keeps every chamber closed
5. Adjacency and correspondence follow the template

Author: EchoViews Contributors
License: MIT
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from meshing.adjacency import adjacency_matrix, build_adjacency
from meshing.correspondence import establish_correspondence, prepare_template_set
from meshing.mesh import (
    AnatomicalMesh,
    StructureId,
    euler_characteristic,
    topology_hash,
    unique_edges,
    validate_mesh,
)
from meshing.mesh_io import landmark_path, load_mesh, save_mesh
from meshing.phantom import generate_phantom, icosphere
from meshing.simplify import downsample
from utils.errors import (
    CorrespondenceError,
    DownsampleError,
    MeshParseError,
    MeshValidationError,
)


@pytest.fixture(scope="module")
def phantom():
    return generate_phantom(0)


@pytest.fixture(scope="module")
def coarse_phantom():
    return generate_phantom(3, detail=1)


@pytest.fixture(scope="module")
def downsampled(phantom):
    return downsample(phantom, 500)


def _without_first_face(mesh: AnatomicalMesh) -> AnatomicalMesh:
    return AnatomicalMesh(
        vertices=mesh.vertices,
        faces=mesh.faces[1:],
        structure_of_vertex=mesh.structure_of_vertex,
        landmarks=mesh.landmarks,
        mesh_id=mesh.mesh_id,
    )


class TestPhantom:
    """Test the seeded four-chamber phantom."""

    def test_sizes(self, coarse_phantom):
        """Four icospheres of 42 vertices and 80 faces at detail 1."""
        assert coarse_phantom.n_vertices == 4 * 42
        assert coarse_phantom.n_faces == 4 * 80

    def test_icosphere_counts(self):
        points, faces = icosphere(2)
        assert points.shape == (162, 3)
        assert faces.shape == (320, 3)
        assert np.allclose(np.linalg.norm(points, axis=1), 1.0)

    def test_every_chamber_is_a_sphere(self, phantom):
        face_structures = phantom.face_structures()
        for structure in StructureId:
            faces = phantom.faces[face_structures == int(structure)]
            assert euler_characteristic(faces) == 2, structure.name

    def test_same_seed_is_identical(self, phantom):
        again = generate_phantom(0)
        assert np.array_equal(phantom.vertices, again.vertices)
        for name, point in phantom.landmarks.items():
            assert np.array_equal(point, again.landmarks[name])

    def test_seeds_share_topology(self, phantom):
        other = generate_phantom(1)
        assert not np.allclose(phantom.vertices, other.vertices)
        assert topology_hash(phantom) == topology_hash(other)

    def test_ten_seeds_are_distinct(self):
        meshes = [generate_phantom(seed, detail=1).vertices for seed in range(10)]
        for i in range(10):
            for j in range(i + 1, 10):
                assert not np.array_equal(meshes[i], meshes[j]), (i, j)

    def test_mesh_id(self):
        assert generate_phantom(12, detail=1).mesh_id == "phantom_0012"

    def test_detail_zero_rejected(self):
        with pytest.raises(ValueError):
            generate_phantom(0, detail=0)


class TestValidation:
    """Test the AnatomicalMesh invariants."""

    def test_phantom_is_valid(self, phantom):
        validate_mesh(phantom)

    def test_open_surface(self, coarse_phantom):
        with pytest.raises(MeshValidationError, match="open surface"):
            _without_first_face(coarse_phantom).validate()

    def test_face_across_structures(self, coarse_phantom):
        faces = coarse_phantom.faces.copy()
        lv = coarse_phantom.structure_vertices(StructureId.LV)
        rv = coarse_phantom.structure_vertices(StructureId.RV)
        faces[0] = [lv[0], lv[1], rv[0]]
        mesh = AnatomicalMesh(
            coarse_phantom.vertices,
            faces,
            coarse_phantom.structure_of_vertex,
            coarse_phantom.landmarks,
            "broken",
        )
        with pytest.raises(MeshValidationError, match="more than one structure"):
            mesh.validate()

    def test_missing_landmark(self, coarse_phantom):
        landmarks = dict(coarse_phantom.landmarks)
        del landmarks["aortic_valve_center"]
        mesh = AnatomicalMesh(
            coarse_phantom.vertices,
            coarse_phantom.faces,
            coarse_phantom.structure_of_vertex,
            landmarks,
            "broken",
        )
        with pytest.raises(MeshValidationError, match="aortic_valve_center"):
            mesh.validate()

    def test_non_finite_vertex(self, coarse_phantom):
        vertices = coarse_phantom.vertices.copy()
        vertices[5, 1] = np.nan
        with pytest.raises(MeshValidationError, match="non-finite"):
            coarse_phantom.with_vertices(vertices).validate()

    def test_arrays_are_read_only(self, coarse_phantom):
        with pytest.raises(ValueError):
            coarse_phantom.vertices[0, 0] = 1.0

    def test_topology_hash_ignores_positions(self, coarse_phantom):
        moved = coarse_phantom.transformed(np.eye(3), np.array([10.0, -4.0, 2.5]))
        assert topology_hash(moved) == topology_hash(coarse_phantom)
        assert np.allclose(moved.landmarks["lv_apex"], coarse_phantom.landmarks["lv_apex"] + [10.0, -4.0, 2.5])


class TestMeshIO:
    """Test OBJ writing and parsing."""

    def test_round_trip(self, coarse_phantom, tmp_path):
        path = tmp_path / "heart.obj"
        save_mesh(coarse_phantom, path)
        loaded = load_mesh(path)
        assert loaded.mesh_id == coarse_phantom.mesh_id
        assert np.array_equal(loaded.vertices, coarse_phantom.vertices)
        assert np.array_equal(loaded.faces, coarse_phantom.faces)
        assert np.array_equal(loaded.structure_of_vertex, coarse_phantom.structure_of_vertex)
        assert topology_hash(loaded) == topology_hash(coarse_phantom)

    def test_save_is_byte_stable(self, coarse_phantom, tmp_path):
        first, second = tmp_path / "a.obj", tmp_path / "b.obj"
        save_mesh(coarse_phantom, first)
        save_mesh(load_mesh(first), second)
        assert first.read_bytes() == second.read_bytes()
        assert landmark_path(first).read_bytes() == landmark_path(second).read_bytes()

    def test_bad_face_index_reports_line(self, coarse_phantom, tmp_path):
        path = tmp_path / "bad.obj"
        save_mesh(coarse_phantom, path)
        lines = path.read_text().splitlines()
        first_face = next(i for i, line in enumerate(lines) if line.startswith("f "))
        lines[first_face] = "f 1 2 9999"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MeshParseError) as info:
            load_mesh(path)
        assert info.value.line == first_face + 1
        assert f"bad.obj:{first_face + 1}" in str(info.value)

    def test_missing_sidecar(self, coarse_phantom, tmp_path):
        path = tmp_path / "alone.obj"
        save_mesh(coarse_phantom, path)
        landmark_path(path).unlink()
        with pytest.raises(MeshParseError, match="sidecar"):
            load_mesh(path)

    def test_face_outside_group(self, tmp_path):
        path = tmp_path / "nogroup.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        with pytest.raises(MeshParseError, match="structure group") as info:
            load_mesh(path)
        assert info.value.line == 4

    def test_open_surface_on_load(self, coarse_phantom, tmp_path):
        path = tmp_path / "open.obj"
        save_mesh(_without_first_face(coarse_phantom), path)
        with pytest.raises(MeshValidationError, match="open surface"):
            load_mesh(path)


class TestDownsample:
    """Test shortest-edge-collapse simplification."""

    def test_reaches_budget(self, downsampled):
        assert downsampled.n_vertices == 500

    def test_chambers_stay_closed(self, downsampled):
        downsampled.validate()
        face_structures = downsampled.face_structures()
        for structure in StructureId:
            faces = downsampled.faces[face_structures == int(structure)]
            assert euler_characteristic(faces) == 2, structure.name

    def test_keeps_landmarks(self, phantom, downsampled):
        for name, point in phantom.landmarks.items():
            assert np.array_equal(downsampled.landmarks[name], point)

    def test_same_count_is_identity(self, coarse_phantom):
        assert downsample(coarse_phantom, coarse_phantom.n_vertices) is coarse_phantom

    def test_target_above_count(self, coarse_phantom):
        with pytest.raises(DownsampleError, match="exceeds"):
            downsample(coarse_phantom, coarse_phantom.n_vertices + 1)

    def test_target_too_small(self, coarse_phantom):
        with pytest.raises(DownsampleError, match="fewer than 4"):
            downsample(coarse_phantom, 12)


class TestAdjacency:
    """Test vertex neighbourhoods."""

    def test_symmetric(self, coarse_phantom):
        matrix = adjacency_matrix(coarse_phantom)
        assert (matrix != matrix.T).nnz == 0

    def test_neighbours_sorted_and_in_structure(self, coarse_phantom):
        labels = coarse_phantom.structure_of_vertex
        for vertex, neighbours in enumerate(build_adjacency(coarse_phantom)):
            assert np.all(np.diff(neighbours) > 0)
            assert np.all(labels[neighbours] == labels[vertex])
            assert vertex not in neighbours

    def test_handshake(self, coarse_phantom):
        degree_sum = sum(len(n) for n in build_adjacency(coarse_phantom))
        assert degree_sum == 2 * len(unique_edges(coarse_phantom.faces))

    def test_icosphere_degrees(self, coarse_phantom):
        degrees = sorted({len(n) for n in build_adjacency(coarse_phantom)})
        assert degrees == [5, 6]


class TestCorrespondence:
    """Test re-sampling on the template topology."""

    def test_self_correspondence_is_identity(self, coarse_phantom):
        result = establish_correspondence(coarse_phantom, coarse_phantom)
        assert np.array_equal(result.vertices, coarse_phantom.vertices)
        assert result.template_topology_id == topology_hash(coarse_phantom)

    def test_template_layout(self, coarse_phantom):
        other = generate_phantom(8, detail=2)
        result = establish_correspondence(coarse_phantom, other)
        assert result.n_vertices == coarse_phantom.n_vertices
        assert np.array_equal(result.faces, coarse_phantom.faces)
        assert result.mesh_id == other.mesh_id
        assert topology_hash(result) == topology_hash(coarse_phantom)

    def test_positions_come_from_same_structure(self, coarse_phantom):
        other = generate_phantom(8, detail=2)
        result = establish_correspondence(coarse_phantom, other)
        for structure in StructureId:
            subject = other.vertices[other.structure_vertices(structure)]
            for point in result.vertices[coarse_phantom.structure_vertices(structure)]:
                assert np.any(np.all(subject == point, axis=1))

    def test_rigid_offset_without_prealign(self, coarse_phantom):
        shift = np.array([0.1, 0.0, 0.0])
        moved = coarse_phantom.with_vertices(coarse_phantom.vertices + shift, "moved")
        result = establish_correspondence(coarse_phantom, moved)
        assert np.allclose(result.vertices, coarse_phantom.vertices + shift)

    def test_prealign_undoes_translation(self, coarse_phantom):
        shift = np.array([3.0, -2.0, 1.5])
        moved = coarse_phantom.with_vertices(coarse_phantom.vertices + shift, "moved")
        result = establish_correspondence(coarse_phantom, moved, rigid_prealign=True)
        assert np.array_equal(result.vertices, moved.vertices)

    def test_landmarks_are_the_subjects(self, coarse_phantom):
        other = generate_phantom(8, detail=1)
        result = establish_correspondence(coarse_phantom, other)
        assert np.array_equal(result.landmarks["mitral_center"], other.landmarks["mitral_center"])

    def test_missing_structure(self, coarse_phantom):
        keep = coarse_phantom.structure_of_vertex != int(StructureId.RA)
        subject = AnatomicalMesh(
            coarse_phantom.vertices,
            coarse_phantom.faces,
            np.where(keep, coarse_phantom.structure_of_vertex, StructureId.LA),
            coarse_phantom.landmarks,
            "no_ra",
        )
        with pytest.raises(CorrespondenceError, match="RA"):
            establish_correspondence(coarse_phantom, subject)

    def test_prepare_template_set(self):
        meshes = [generate_phantom(seed, detail=1) for seed in (0, 1, 2)]
        template, corresponded = prepare_template_set(meshes, 1000)
        assert template.mesh_id == "template"
        assert template.n_vertices == meshes[0].n_vertices
        assert [m.mesh_id for m in corresponded] == [m.mesh_id for m in meshes]
        assert len({topology_hash(m) for m in corresponded}) == 1

    def test_prepare_needs_meshes(self):
        with pytest.raises(CorrespondenceError):
            prepare_template_set([], 500)
