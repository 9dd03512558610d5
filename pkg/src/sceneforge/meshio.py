"""Mesh and point-cloud file I/O: OBJ (ASCII) and PLY (ASCII / binary LE).

OBJ faces use 1-based indices; n-gons are triangulated by fan. PLY supports
float32/float64 vertex coordinates, optional uchar red/green/blue per vertex
and a vertex_indices (or vertex_index) list per face. Binary PLY is written
in double precision, so a save/load round trip is lossless.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GeometryError, MeshParseError
from .geometry import PointCloud, TriangleMesh, triangle_areas


@dataclass(frozen=True)
class LoadReport:
    """What a mesh load found: counts plus degenerate (zero-area) faces."""

    path: str
    n_vertices: int
    n_triangles: int
    degenerate_triangles: tuple[int, ...]
    warnings: tuple[str, ...] = ()


_PLY_SCALAR = {
    "char": "b", "int8": "b",
    "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h",
    "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i",
    "uint": "I", "uint32": "I",
    "float": "f", "float32": "f",
    "double": "d", "float64": "d",
}


def load_mesh(path) -> TriangleMesh:
    mesh, _ = load_mesh_with_report(path)
    return mesh


def load_mesh_with_report(path) -> tuple[TriangleMesh, LoadReport]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    suffix = path.suffix.lower()
    if suffix == ".obj":
        mesh = _load_obj(path)
    elif suffix == ".ply":
        mesh = _load_ply(path)
    else:
        raise MeshParseError(f"unsupported mesh format '{suffix}'", path=str(path))
    degenerate = ()
    if mesh.n_triangles:
        degenerate = tuple(int(i) for i in np.flatnonzero(triangle_areas(mesh) == 0.0))
    warnings = ()
    if degenerate:
        warnings = (f"{len(degenerate)} zero-area triangle(s) retained",)
    report = LoadReport(
        path=str(path),
        n_vertices=mesh.n_vertices,
        n_triangles=mesh.n_triangles,
        degenerate_triangles=degenerate,
        warnings=warnings,
    )
    return mesh, report


def save_mesh(mesh: TriangleMesh, path, binary: bool = True) -> None:
    """Write a mesh as .obj (ASCII) or .ply (binary LE by default)."""
    if mesh.is_empty():
        raise GeometryError("refusing to write a mesh with no triangles")
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        _save_obj(mesh, path)
    elif suffix == ".ply":
        _save_ply(mesh.vertices, mesh.triangles, mesh.vertex_colors, path, binary)
    else:
        raise MeshParseError(f"unsupported mesh format '{suffix}'", path=str(path))


def save_point_cloud(cloud: PointCloud, path, binary: bool = True) -> None:
    """Write a point cloud as a vertex-only PLY."""
    _save_ply(cloud.points, None, None, Path(path), binary)


def load_point_cloud(path) -> PointCloud:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    vertices, _, _ = _parse_ply(path)
    return PointCloud(vertices)


# --- OBJ ---------------------------------------------------------------


def _load_obj(path: Path) -> TriangleMesh:
    vertices = []
    colors = []
    faces = []
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                try:
                    vals = [float(x) for x in parts[1:]]
                except ValueError:
                    raise MeshParseError("bad vertex line", path=str(path), line=lineno)
                if len(vals) < 3:
                    raise MeshParseError("vertex needs 3 coordinates", path=str(path), line=lineno)
                vertices.append(vals[:3])
                if len(vals) >= 6:
                    colors.append(vals[3:6])
            elif parts[0] == "f":
                idx = []
                for token in parts[1:]:
                    head = token.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise MeshParseError(f"bad face index '{token}'", path=str(path), line=lineno)
                    if i == 0:
                        raise MeshParseError("face index 0 (OBJ indices are 1-based)", path=str(path), line=lineno)
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                if len(idx) < 3:
                    raise MeshParseError("face needs at least 3 vertices", path=str(path), line=lineno)
                for k in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[k], idx[k + 1]))
    if not vertices:
        raise MeshParseError("no vertices found", path=str(path))
    vertex_colors = None
    if colors:
        if len(colors) != len(vertices):
            raise MeshParseError("only some vertices carry colors", path=str(path))
        vertex_colors = np.clip(np.asarray(colors, dtype=np.float64), 0.0, 1.0)
    try:
        return TriangleMesh(np.asarray(vertices), np.asarray(faces, dtype=np.int64).reshape(-1, 3), vertex_colors)
    except GeometryError as e:
        raise MeshParseError(str(e), path=str(path))


def _fmt(v) -> str:
    return repr(float(v))  # shortest exact decimal round trip


def _save_obj(mesh: TriangleMesh, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        if mesh.vertex_colors is not None:
            for v, c in zip(mesh.vertices, mesh.vertex_colors):
                f.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}"
                        f" {_fmt(c[0])} {_fmt(c[1])} {_fmt(c[2])}\n")
        else:
            for v in mesh.vertices:
                f.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for t in mesh.triangles:
            f.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


# --- PLY ---------------------------------------------------------------


def _load_ply(path: Path) -> TriangleMesh:
    vertices, faces, colors = _parse_ply(path)
    if faces is None or len(faces) == 0:
        raise MeshParseError("PLY has no faces (use load_point_cloud for clouds)", path=str(path))
    try:
        return TriangleMesh(vertices, faces, colors)
    except GeometryError as e:
        raise MeshParseError(str(e), path=str(path))


def _parse_ply(path: Path):
    """Return (vertices, faces-or-None, colors-or-None) from a PLY file."""
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"ply":
            raise MeshParseError("not a PLY file (missing 'ply' magic)", path=str(path))
        fmt = None
        elements = []  # (name, count, [(kind, name, types...)])
        lineno = 1
        while True:
            line = f.readline()
            lineno += 1
            if not line:
                raise MeshParseError("unexpected EOF in header", path=str(path), line=lineno)
            parts = line.decode("ascii", errors="replace").split()
            if not parts or parts[0] == "comment" or parts[0] == "obj_info":
                continue
            if parts[0] == "format":
                if parts[1] == "ascii":
                    fmt = "ascii"
                elif parts[1] == "binary_little_endian":
                    fmt = "binary"
                else:
                    raise MeshParseError(f"unsupported PLY format '{parts[1]}'", path=str(path), line=lineno)
            elif parts[0] == "element":
                elements.append((parts[1], int(parts[2]), []))
            elif parts[0] == "property":
                if not elements:
                    raise MeshParseError("property before any element", path=str(path), line=lineno)
                if parts[1] == "list":
                    ctype, itype, name = parts[2], parts[3], parts[4]
                    if ctype not in _PLY_SCALAR or itype not in _PLY_SCALAR:
                        raise MeshParseError(f"unsupported list types '{ctype} {itype}'", path=str(path), line=lineno)
                    elements[-1][2].append(("list", name, ctype, itype))
                else:
                    ptype, name = parts[1], parts[2]
                    if ptype not in _PLY_SCALAR:
                        raise MeshParseError(f"unsupported property type '{ptype}'", path=str(path), line=lineno)
                    elements[-1][2].append(("scalar", name, ptype))
            elif parts[0] == "end_header":
                break
            else:
                raise MeshParseError(f"unsupported header keyword '{parts[0]}'", path=str(path), line=lineno)
        if fmt is None:
            raise MeshParseError("missing format line", path=str(path))

        vertices = faces = colors = None
        for name, count, props in elements:
            if fmt == "ascii":
                rows = _read_ply_ascii_element(f, count, props, path)
            else:
                rows = _read_ply_binary_element(f, count, props, path)
            if name == "vertex":
                vertices, colors = _extract_vertices(rows, props, path)
            elif name == "face":
                faces = _extract_faces(rows, props, path)
            # other elements (edges, materials, ...) are parsed and dropped

    if vertices is None:
        raise MeshParseError("PLY has no vertex element", path=str(path))
    return vertices, faces, colors


def _read_ply_ascii_element(f, count, props, path):
    rows = []
    for _ in range(count):
        line = f.readline()
        if not line:
            raise MeshParseError("unexpected EOF in ASCII body", path=str(path))
        tokens = line.split()
        row = {}
        pos = 0
        for prop in props:
            if prop[0] == "scalar":
                row[prop[1]] = float(tokens[pos])
                pos += 1
            else:
                n = int(tokens[pos])
                pos += 1
                row[prop[1]] = [float(t) for t in tokens[pos:pos + n]]
                pos += n
        rows.append(row)
    return rows


def _read_ply_binary_element(f, count, props, path):
    rows = []
    for _ in range(count):
        row = {}
        for prop in props:
            if prop[0] == "scalar":
                code = _PLY_SCALAR[prop[2]]
                size = struct.calcsize("<" + code)
                buf = f.read(size)
                if len(buf) != size:
                    raise MeshParseError("unexpected EOF in binary body", path=str(path))
                row[prop[1]] = struct.unpack("<" + code, buf)[0]
            else:
                ccode = _PLY_SCALAR[prop[2]]
                icode = _PLY_SCALAR[prop[3]]
                csize = struct.calcsize("<" + ccode)
                buf = f.read(csize)
                if len(buf) != csize:
                    raise MeshParseError("unexpected EOF in binary body", path=str(path))
                n = struct.unpack("<" + ccode, buf)[0]
                isize = struct.calcsize("<" + icode)
                buf = f.read(isize * n)
                if len(buf) != isize * n:
                    raise MeshParseError("unexpected EOF in binary body", path=str(path))
                row[prop[1]] = list(struct.unpack(f"<{n}{icode}", buf))
        rows.append(row)
    return rows


def _extract_vertices(rows, props, path):
    names = [p[1] for p in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise MeshParseError(f"vertex element lacks '{axis}'", path=str(path))
    vertices = np.array([[r["x"], r["y"], r["z"]] for r in rows], dtype=np.float64).reshape(-1, 3)
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.array([[r["red"], r["green"], r["blue"]] for r in rows], dtype=np.float64) / 255.0
        colors = colors.reshape(-1, 3)
    return vertices, colors


def _extract_faces(rows, props, path):
    list_name = None
    for p in props:
        if p[0] == "list" and p[1] in ("vertex_indices", "vertex_index"):
            list_name = p[1]
    if list_name is None:
        raise MeshParseError("face element lacks vertex_indices", path=str(path))
    faces = []
    for r in rows:
        idx = [int(i) for i in r[list_name]]
        if len(idx) < 3:
            raise MeshParseError("face with fewer than 3 indices", path=str(path))
        for k in range(1, len(idx) - 1):
            faces.append((idx[0], idx[k], idx[k + 1]))
    return np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def _save_ply(vertices, faces, colors, path: Path, binary: bool) -> None:
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {len(vertices)}")
    header += ["property double x", "property double y", "property double z"]
    if colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
        color_u8 = np.clip(np.round(np.asarray(colors) * 255.0), 0, 255).astype(np.uint8)
    if faces is not None:
        header.append(f"element face {len(faces)}")
        header.append("property list uchar int vertex_indices")
    header.append("end_header")

    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            for i, v in enumerate(vertices):
                f.write(struct.pack("<3d", *v))
                if colors is not None:
                    f.write(struct.pack("<3B", *color_u8[i]))
            if faces is not None:
                for t in faces:
                    f.write(struct.pack("<B3i", 3, int(t[0]), int(t[1]), int(t[2])))
        else:
            for i, v in enumerate(vertices):
                line = f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}"
                if colors is not None:
                    line += " {} {} {}".format(*color_u8[i])
                f.write((line + "\n").encode("ascii"))
            if faces is not None:
                for t in faces:
                    f.write(f"3 {t[0]} {t[1]} {t[2]}\n".encode("ascii"))
