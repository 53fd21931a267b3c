"""
Wavefront OBJ reading and writing for AnatomicalMesh.

File grammar (see docs/FORMATS.md):

    # comment
    o <mesh_id>
    v <x> <y> <z>
    g <LV|RV|LA|RA>
    f <i> <j> <k>          1-based, `i/t/n` tokens accepted, only `i` used

A group header applies to the faces that follow it and may repeat, which
lets the writer keep the face order of the mesh. Vertex labels are taken
from the faces that use them. Landmarks live next to the OBJ in
`<stem>.landmarks.json`: an object mapping the four landmark names to
three decimal coordinates.

Author: EchoViews Contributors
License: MIT
"""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

from meshing.mesh import AnatomicalMesh, StructureId
from utils.constants import LANDMARK_NAMES
from utils.errors import MeshParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def landmark_path(path: PathLike) -> Path:
    """Sidecar landmark file belonging to an OBJ path."""
    path = Path(path)
    return path.with_name(f"{path.stem}.landmarks.json")


def _format_float(value: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(value))


def save_mesh(mesh: AnatomicalMesh, path: PathLike) -> None:
    """
    Write `mesh` as OBJ plus landmark sidecar.

    Output is a pure function of the mesh, so saving a loaded mesh again
    reproduces the file byte for byte.

    Args:
        mesh: Valid mesh
        path: Target `.obj` path; the sidecar is written next to it

    Raises:
        OSError: If either file cannot be written
    """
    path = Path(path)
    lines = ["# echoviews mesh", f"o {mesh.mesh_id}"]
    for x, y, z in mesh.vertices:
        lines.append(f"v {_format_float(x)} {_format_float(y)} {_format_float(z)}")

    current = None
    for face, code in zip(mesh.faces, mesh.face_structures()):
        if code != current:
            lines.append(f"g {StructureId(int(code)).name}")
            current = code
        lines.append(f"f {face[0] + 1} {face[1] + 1} {face[2] + 1}")

    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")

    landmarks = {
        name: [float(c) for c in mesh.landmarks[name]]
        for name in LANDMARK_NAMES
        if name in mesh.landmarks
    }
    with open(landmark_path(path), "w", encoding="utf-8", newline="\n") as handle:
        json.dump(landmarks, handle, indent=2)
        handle.write("\n")


def _parse_index(token: str, n_vertices: int, path: Path, line_no: int) -> int:
    head = token.split("/", 1)[0]
    try:
        index = int(head)
    except ValueError:
        raise MeshParseError(f"bad face index '{token}'", path, line_no) from None
    if index < 1 or index > n_vertices:
        raise MeshParseError(
            f"face index {index} out of range for {n_vertices} vertices", path, line_no
        )
    return index - 1


def _read_landmarks(path: Path) -> dict[str, np.ndarray]:
    sidecar = landmark_path(path)
    if not sidecar.exists():
        raise MeshParseError("landmark sidecar not found", sidecar)
    try:
        with open(sidecar, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as e:
        raise MeshParseError(f"invalid landmark file: {e.msg}", sidecar, e.lineno) from None

    if not isinstance(raw, dict):
        raise MeshParseError("landmark file must contain an object", sidecar)

    landmarks = {}
    for name, coords in raw.items():
        if name not in LANDMARK_NAMES:
            raise MeshParseError(f"unknown landmark '{name}'", sidecar)
        if not isinstance(coords, list) or len(coords) != 3:
            raise MeshParseError(f"landmark '{name}' needs three coordinates", sidecar)
        try:
            landmarks[name] = np.array([float(c) for c in coords], dtype=np.float64)
        except (TypeError, ValueError):
            raise MeshParseError(f"landmark '{name}' has non-numeric coordinates", sidecar) from None
    return landmarks


def load_mesh(path: PathLike) -> AnatomicalMesh:
    """
    Read and validate an OBJ mesh with its landmark sidecar.

    Args:
        path: `.obj` file

    Returns:
        Validated AnatomicalMesh, vertex order as in the file

    Raises:
        MeshParseError: Malformed OBJ or sidecar
        MeshValidationError: The parsed mesh violates an invariant
        OSError: If the file cannot be read
    """
    path = Path(path)
    mesh_id = path.stem
    vertices: list[list[float]] = []
    face_tokens: list[tuple[list[str], int, int]] = []
    group = None

    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split()
            if tag == "v":
                if len(rest) < 3:
                    raise MeshParseError("vertex needs three coordinates", path, line_no)
                try:
                    vertices.append([float(c) for c in rest[:3]])
                except ValueError:
                    raise MeshParseError("non-numeric vertex coordinate", path, line_no) from None
            elif tag == "g":
                if len(rest) != 1:
                    raise MeshParseError("group header needs exactly one name", path, line_no)
                try:
                    group = int(StructureId.from_name(rest[0]))
                except ValueError:
                    raise MeshParseError(f"unknown structure group '{rest[0]}'", path, line_no) from None
            elif tag == "f":
                if len(rest) != 3:
                    raise MeshParseError("only triangle faces are supported", path, line_no)
                if group is None:
                    raise MeshParseError("face outside of a structure group", path, line_no)
                face_tokens.append((rest, group, line_no))
            elif tag == "o":
                if rest:
                    mesh_id = rest[0]
            elif tag in ("vn", "vt", "s", "usemtl", "mtllib"):
                continue
            else:
                raise MeshParseError(f"unsupported OBJ statement '{tag}'", path, line_no)

    n_vertices = len(vertices)
    if n_vertices == 0 or not face_tokens:
        raise MeshParseError("file contains no vertices or no faces", path)

    faces = np.empty((len(face_tokens), 3), dtype=np.int64)
    labels = np.zeros(n_vertices, dtype=np.int8)
    for row, (tokens, code, line_no) in enumerate(face_tokens):
        for col, token in enumerate(tokens):
            index = _parse_index(token, n_vertices, path, line_no)
            if labels[index] not in (0, code):
                raise MeshParseError(
                    f"vertex {index + 1} is used by two structures", path, line_no
                )
            labels[index] = code
            faces[row, col] = index

    mesh = AnatomicalMesh(
        vertices=np.array(vertices, dtype=np.float64),
        faces=faces,
        structure_of_vertex=labels,
        landmarks=_read_landmarks(path),
        mesh_id=mesh_id,
    )
    mesh.validate()
    logger.debug("loaded %s from %s", mesh, path)
    return mesh
