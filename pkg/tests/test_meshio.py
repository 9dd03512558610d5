import numpy as np
import pytest

from sceneforge.errors import GeometryError, MeshParseError
from sceneforge.geometry import PointCloud, TriangleMesh
from sceneforge.meshio import (
    load_mesh,
    load_mesh_with_report,
    load_point_cloud,
    save_mesh,
    save_point_cloud,
)

from conftest import box_mesh

MINIMAL_OBJ = """\
# one triangle
v 0.0 0.0 0.0
v 1.0 0.0 0.0
v 0.0 1.0 0.0
f 1 2 3
"""


class TestObj:
    def test_minimal_triangle(self, tmp_path):
        path = tmp_path / "tri.obj"
        path.write_text(MINIMAL_OBJ)
        mesh = load_mesh(path)
        assert mesh.n_vertices == 3
        assert mesh.n_triangles == 1

    def test_face_index_zero_rejected(self, tmp_path):
        path = tmp_path / "bad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")
        with pytest.raises(MeshParseError, match="1-based"):
            load_mesh(path)

    def test_ngon_fan_triangulation(self, tmp_path):
        path = tmp_path / "quad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        mesh = load_mesh(path)
        assert mesh.n_triangles == 2

    def test_slash_face_tokens(self, tmp_path):
        path = tmp_path / "tex.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n")
        assert load_mesh(path).n_triangles == 1

    def test_negative_relative_indices(self, tmp_path):
        path = tmp_path / "rel.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
        mesh = load_mesh(path)
        np.testing.assert_array_equal(mesh.triangles, [[0, 1, 2]])

    def test_ascii_roundtrip_tolerance(self, tmp_path):
        verts = np.array([[0.123456789, -3.987654321, 7.5], [1, 0, 0], [0, 1, 0]])
        mesh = TriangleMesh(verts, [[0, 1, 2]])
        path = tmp_path / "roundtrip.obj"
        save_mesh(mesh, path)
        back = load_mesh(path)
        np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-6)
        np.testing.assert_array_equal(back.triangles, mesh.triangles)


class TestPly:
    def test_unit_cube_roundtrip_binary(self, tmp_path, unit_cube):
        path = tmp_path / "cube.ply"
        save_mesh(unit_cube, path)
        back = load_mesh(path)
        assert back.n_vertices == 8
        assert back.n_triangles == 12
        np.testing.assert_array_equal(back.vertices, unit_cube.vertices)  # lossless
        np.testing.assert_array_equal(back.triangles, unit_cube.triangles)

    def test_ascii_ply_roundtrip(self, tmp_path, unit_cube):
        path = tmp_path / "cube.ply"
        save_mesh(unit_cube, path, binary=False)
        back = load_mesh(path)
        np.testing.assert_allclose(back.vertices, unit_cube.vertices, atol=1e-6)

    def test_handwritten_ascii_ply(self, tmp_path):
        path = tmp_path / "hand.ply"
        path.write_text(
            "ply\nformat ascii 1.0\ncomment test\n"
            "element vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
            "element face 1\nproperty list uchar int vertex_indices\n"
            "end_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"
        )
        mesh = load_mesh(path)
        assert mesh.n_vertices == 3 and mesh.n_triangles == 1

    def test_color_roundtrip(self, tmp_path):
        mesh = box_mesh(color=(0.2, 0.4, 0.8))
        path = tmp_path / "color.ply"
        save_mesh(mesh, path)
        back = load_mesh(path)
        assert back.vertex_colors is not None
        np.testing.assert_allclose(back.vertex_colors, mesh.vertex_colors, atol=1 / 255)

    def test_big_endian_rejected(self, tmp_path):
        path = tmp_path / "big.ply"
        path.write_text("ply\nformat binary_big_endian 1.0\nelement vertex 0\n"
                        "property float x\nproperty float y\nproperty float z\nend_header\n")
        with pytest.raises(MeshParseError, match="unsupported"):
            load_mesh(path)

    def test_unknown_property_type_rejected(self, tmp_path):
        path = tmp_path / "weird.ply"
        path.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                        "property quaternion x\nend_header\n0\n")
        with pytest.raises(MeshParseError, match="unsupported"):
            load_mesh(path)

    def test_quad_faces_fan_triangulated(self, tmp_path):
        path = tmp_path / "quad.ply"
        path.write_text(
            "ply\nformat ascii 1.0\nelement vertex 4\n"
            "property float x\nproperty float y\nproperty float z\n"
            "element face 1\nproperty list uchar int vertex_indices\n"
            "end_header\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
        )
        assert load_mesh(path).n_triangles == 2


class TestErrorsAndReport:
    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_mesh("/nonexistent/mesh.ply")

    def test_unsupported_extension(self, tmp_path):
        path = tmp_path / "mesh.stl"
        path.write_text("")
        with pytest.raises(MeshParseError):
            load_mesh(path)

    def test_refuses_empty_mesh(self, tmp_path):
        mesh = TriangleMesh(np.empty((0, 3)), np.empty((0, 3), dtype=np.int64))
        with pytest.raises(GeometryError):
            save_mesh(mesh, tmp_path / "empty.ply")

    def test_degenerate_triangles_flagged(self, tmp_path):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0]], dtype=float)
        mesh = TriangleMesh(verts, [[0, 1, 2], [0, 1, 3]])  # second has zero area
        path = tmp_path / "degen.ply"
        save_mesh(mesh, path)
        back, report = load_mesh_with_report(path)
        assert back.n_triangles == 2  # retained
        assert report.degenerate_triangles == (1,)
        assert report.warnings


class TestPointCloud:
    def test_roundtrip_binary(self, tmp_path, rng):
        cloud = PointCloud(rng.normal(size=(257, 3)))
        path = tmp_path / "cloud.ply"
        save_point_cloud(cloud, path)
        back = load_point_cloud(path)
        np.testing.assert_array_equal(back.points, cloud.points)

    def test_roundtrip_ascii(self, tmp_path, rng):
        cloud = PointCloud(rng.normal(size=(31, 3)))
        path = tmp_path / "cloud.ply"
        save_point_cloud(cloud, path, binary=False)
        back = load_point_cloud(path)
        np.testing.assert_allclose(back.points, cloud.points, atol=1e-6)
