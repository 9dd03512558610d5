"""Core geometry types: triangle meshes, point clouds, bounding boxes,
bounding-cube normalization, surface sampling and a nearest-neighbor index.

Coordinate convention throughout the package: right-handed, Z-up world frame,
units in meters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateGeometryError, GeometryError


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle set with optional per-vertex RGB color in [0, 1].

    Immutable after construction; all operations return new meshes.
    """

    vertices: np.ndarray  # (N, 3) float64
    triangles: np.ndarray  # (M, 3) int64, indices into vertices
    vertex_colors: np.ndarray | None = None  # (N, 3) float64 in [0, 1]

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) > 0:
            if len(v) < 3:
                raise GeometryError(f"mesh with {len(t)} triangles has only {len(v)} vertices")
            if t.min() < 0 or t.max() >= len(v):
                raise GeometryError("triangle index out of range")
            if ((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])).any():
                raise GeometryError("triangle repeats a vertex index")
        if not np.isfinite(v).all():
            raise GeometryError("non-finite vertex coordinate")
        object.__setattr__(self, "vertices", _as_readonly(v))
        object.__setattr__(self, "triangles", _as_readonly(t))
        if self.vertex_colors is not None:
            c = np.asarray(self.vertex_colors, dtype=np.float64).reshape(-1, 3)
            if len(c) != len(v):
                raise GeometryError("vertex_colors length does not match vertices")
            if c.min(initial=0.0) < 0.0 or c.max(initial=0.0) > 1.0:
                raise GeometryError("vertex colors outside [0, 1]")
            object.__setattr__(self, "vertex_colors", _as_readonly(c))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def corners(self) -> np.ndarray:
        """Per-triangle vertex positions, shape (M, 3, 3)."""
        return self.vertices[self.triangles]

    def aabb(self) -> "Aabb":
        if len(self.vertices) == 0:
            raise GeometryError("empty mesh has no bounding box")
        return Aabb(self.vertices.min(axis=0), self.vertices.max(axis=0))

    def transformed(self, transform: "SimilarityTransform") -> "TriangleMesh":
        return TriangleMesh(transform.apply(self.vertices), self.triangles, self.vertex_colors)


@dataclass(frozen=True)
class PointCloud:
    """N x 3 point set (meters). May be empty."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.isfinite(p).all():
            raise GeometryError("non-finite point coordinate")
        object.__setattr__(self, "points", _as_readonly(p))

    def __len__(self) -> int:
        return len(self.points)

    def aabb(self) -> "Aabb":
        if len(self.points) == 0:
            raise GeometryError("empty cloud has no bounding box")
        return Aabb(self.points.min(axis=0), self.points.max(axis=0))


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box, min <= max component-wise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max, dtype=np.float64).reshape(3)
        if (lo > hi).any():
            raise GeometryError("Aabb min exceeds max")
        object.__setattr__(self, "min", _as_readonly(lo))
        object.__setattr__(self, "max", _as_readonly(hi))

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2.0

    @property
    def extent(self) -> np.ndarray:
        return self.max - self.min

    @property
    def max_extent(self) -> float:
        return float(self.extent.max())

    @property
    def bounding_sphere_radius(self) -> float:
        """Radius of the sphere through the box corners, centered at the box center."""
        return float(np.linalg.norm(self.extent) / 2.0)


@dataclass(frozen=True)
class SimilarityTransform:
    """Uniform scale followed by translation: x' = scale * x + translation."""

    scale: float
    translation: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "translation", _as_readonly(t))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) * self.scale + self.translation

    def inverse(self) -> "SimilarityTransform":
        return SimilarityTransform(1.0 / self.scale, -self.translation / self.scale)

    @staticmethod
    def identity() -> "SimilarityTransform":
        return SimilarityTransform(1.0, np.zeros(3))


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    """Per-triangle surface area, shape (M,)."""
    tri = mesh.corners()
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def surface_area(mesh: TriangleMesh) -> float:
    return float(triangle_areas(mesh).sum())


def normalize_to_unit_cube(mesh: TriangleMesh) -> tuple[TriangleMesh, SimilarityTransform]:
    """Center the mesh AABB at the origin and scale its largest extent to 1.

    Scaling is uniform, so shape (pairwise distance ratios) is preserved.
    Returns the normalized mesh and the transform that maps original
    coordinates into the normalized frame.
    """
    if mesh.n_vertices == 0:
        raise GeometryError("cannot normalize an empty mesh")
    box = mesh.aabb()
    if box.max_extent == 0.0:
        raise DegenerateGeometryError("mesh has zero extent (all vertices identical)")
    scale = 1.0 / box.max_extent
    transform = SimilarityTransform(scale, -box.center * scale)
    return mesh.transformed(transform), transform


def sample_surface(
    mesh: TriangleMesh,
    n: int,
    seed: int,
    return_face_indices: bool = False,
):
    """Sample n points uniformly by area over the mesh surface.

    Triangles are chosen with probability proportional to their area
    (zero-area triangles are excluded); the point within each triangle is
    uniform via the reflected-barycentric trick. Deterministic for a fixed
    seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mesh.is_empty():
        raise GeometryError("cannot sample an empty mesh")
    areas = triangle_areas(mesh)
    total = areas.sum()
    if total == 0.0:
        raise DegenerateGeometryError("all triangles are degenerate")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(areas), size=n, p=areas / total)
    tri = mesh.corners()[face_idx]
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    points = tri[:, 0] + u[:, None] * (tri[:, 1] - tri[:, 0]) + v[:, None] * (tri[:, 2] - tri[:, 0])
    cloud = PointCloud(points)
    if return_face_indices:
        return cloud, face_idx
    return cloud


@dataclass(frozen=True)
class NnIndex:
    """Nearest-neighbor index over a point cloud.

    Queries are exact: the result always equals the exhaustive minimum over
    the indexed points, under either the L2 (Euclidean) or L1 (rectilinear)
    norm. Read-only and safe for concurrent queries after construction.
    """

    points: np.ndarray
    _tree: cKDTree = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.points)

    def query(self, queries: np.ndarray, norm: str = "l2") -> tuple[np.ndarray, np.ndarray]:
        """Nearest indexed point for each query row.

        Returns (distances, indices). Distances are recomputed from the
        winning index with plain numpy ops, so they match a brute-force scan
        bit for bit.
        """
        q = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
        p = {"l2": 2, "l1": 1}[norm]
        _, idx = self._tree.query(q, p=p)
        diff = q - self.points[idx]
        if norm == "l2":
            dist = np.sqrt(np.sum(diff * diff, axis=-1))
        else:
            dist = np.sum(np.abs(diff), axis=-1)
        return dist, idx

    def nearest(self, point: np.ndarray, norm: str = "l2") -> tuple[float, int]:
        dist, idx = self.query(np.asarray(point).reshape(1, 3), norm=norm)
        return float(dist[0]), int(idx[0])


def build_nn_index(cloud: PointCloud) -> NnIndex:
    if len(cloud) == 0:
        raise GeometryError("cannot index an empty cloud")
    return NnIndex(cloud.points, cKDTree(cloud.points))
