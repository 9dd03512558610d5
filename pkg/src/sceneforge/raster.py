"""Software z-buffer rendering: perspective RGB/depth and orthographic BEV.

Depth semantics are camera-frame Z (not ray length), so back-projection with
the intrinsics is exact. A pixel belongs to a triangle when its center
(half-integer coordinates) lies inside under the top-left fill convention.
Rendering is deterministic: identical inputs produce bit-identical images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, CameraPose
from .errors import GeometryError
from .geometry import TriangleMesh, _as_readonly

NEAR_PLANE = 1e-6
DEFAULT_ALBEDO = 0.7


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB image, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.uint8)
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValueError("pixels must be (H, W, 3)")
        object.__setattr__(self, "pixels", _as_readonly(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel depth (meters), 0 encodes 'no surface'.

    Perspective renders store camera-frame Z (always > 0 where valid);
    bird's-eye-view renders store the world Z of the top surface.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("values must be (H, W)")
        if not np.isfinite(v).all():
            raise ValueError("depth values must be finite")
        object.__setattr__(self, "values", _as_readonly(v))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def valid_mask(self) -> np.ndarray:
        return self.values != 0.0


@dataclass(frozen=True)
class LightSpec:
    """Single directional light plus an ambient floor."""

    direction: tuple[float, float, float] = (-0.3, -0.5, -0.8)
    intensity: float = 0.8
    ambient: float = 0.2


@dataclass(frozen=True)
class BevFrame:
    """Invertible affine map between world (x, y) and BEV pixel (u, v)."""

    x_min: float
    y_max: float
    pixels_per_meter: float
    width: int
    height: int

    def world_to_pixel(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=np.float64)
        u = (xy[..., 0] - self.x_min) * self.pixels_per_meter
        v = (self.y_max - xy[..., 1]) * self.pixels_per_meter
        return np.stack([u, v], axis=-1)

    def pixel_to_world(self, uv: np.ndarray) -> np.ndarray:
        uv = np.asarray(uv, dtype=np.float64)
        x = self.x_min + uv[..., 0] / self.pixels_per_meter
        y = self.y_max - uv[..., 1] / self.pixels_per_meter
        return np.stack([x, y], axis=-1)

    def pixel_index(self, xy: np.ndarray) -> np.ndarray:
        """Integer pixel containing each world (x, y), clamped to the grid."""
        uv = self.world_to_pixel(xy)
        iu = np.clip(np.floor(uv[..., 0]).astype(np.int64), 0, self.width - 1)
        iv = np.clip(np.floor(uv[..., 1]).astype(np.int64), 0, self.height - 1)
        return np.stack([iu, iv], axis=-1)


def _coverage(tri2d: np.ndarray, width: int, height: int):
    """Pixels whose centers lie inside a screen-space triangle.

    Returns (ix, iy, bary) with barycentrics in the original vertex order,
    or None when nothing is covered. Centers exactly on an edge count only
    for top or left edges, so adjacent triangles never double-claim a pixel.
    """
    area2 = (tri2d[1, 0] - tri2d[0, 0]) * (tri2d[2, 1] - tri2d[0, 1]) - (
        tri2d[1, 1] - tri2d[0, 1]) * (tri2d[2, 0] - tri2d[0, 0])
    if area2 == 0.0:
        return None
    if area2 < 0.0:
        perm = (0, 2, 1)
        area2 = -area2
    else:
        perm = (0, 1, 2)
    q = tri2d[list(perm)]

    lo_x = max(0, math.ceil(q[:, 0].min() - 0.5))
    hi_x = min(width - 1, math.floor(q[:, 0].max() - 0.5))
    lo_y = max(0, math.ceil(q[:, 1].min() - 0.5))
    hi_y = min(height - 1, math.floor(q[:, 1].max() - 0.5))
    if lo_x > hi_x or lo_y > hi_y:
        return None

    iy, ix = np.meshgrid(np.arange(lo_y, hi_y + 1), np.arange(lo_x, hi_x + 1), indexing="ij")
    px = ix + 0.5
    py = iy + 0.5

    mask = None
    w = []
    for k in range(3):
        a = q[(k + 1) % 3]
        b = q[(k + 2) % 3]
        dx = b[0] - a[0]
        dy = b[1] - a[1]
        wk = dx * (py - a[1]) - dy * (px - a[0])
        top_left = (dy == 0.0 and dx > 0.0) or dy < 0.0
        mk = wk > 0.0 if not top_left else wk >= 0.0
        mask = mk if mask is None else (mask & mk)
        w.append(wk)
    if not mask.any():
        return None

    ix = ix[mask]
    iy = iy[mask]
    bary_q = np.stack([w[0][mask], w[1][mask], w[2][mask]], axis=1) / area2
    bary = np.empty_like(bary_q)
    bary[:, list(perm)] = bary_q
    return ix, iy, bary


def _clip_near(pts: np.ndarray, cols: np.ndarray, near: float):
    """Sutherland-Hodgman clip of a camera-space polygon against z >= near."""
    out_p, out_c = [], []
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        ca, cb = cols[i], cols[(i + 1) % n]
        a_in = a[2] >= near
        b_in = b[2] >= near
        if a_in:
            out_p.append(a)
            out_c.append(ca)
        if a_in != b_in:
            t = (near - a[2]) / (b[2] - a[2])
            out_p.append(a + t * (b - a))
            out_c.append(ca + t * (cb - ca))
    return np.asarray(out_p), np.asarray(out_c)


def _face_shades(mesh: TriangleMesh, light: LightSpec) -> np.ndarray:
    """Per-face Lambert shade, double-sided (no back-face culling)."""
    tri = mesh.corners()
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norms = np.linalg.norm(normals, axis=1)
    norms[norms == 0.0] = 1.0
    normals /= norms[:, None]
    d = np.asarray(light.direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    lambert = np.abs(normals @ d)
    return np.clip(light.ambient + light.intensity * lambert, 0.0, 1.0)


def _vertex_colors(mesh: TriangleMesh) -> np.ndarray:
    if mesh.vertex_colors is not None:
        return mesh.vertex_colors
    return np.full((mesh.n_vertices, 3), DEFAULT_ALBEDO)


def render(
    mesh: TriangleMesh,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    light: LightSpec | None = None,
) -> tuple[RgbImage, DepthImage]:
    """Perspective z-buffer rasterization of a mesh into RGB + depth."""
    if mesh.is_empty():
        raise GeometryError("cannot render an empty mesh")
    light = light or LightSpec()
    w, h = intrinsics.width, intrinsics.height

    cam_pts = pose.world_to_camera(mesh.vertices)
    colors = _vertex_colors(mesh)
    shades = _face_shades(mesh, light)

    depth = np.full((h, w), np.inf)
    rgb = np.zeros((h, w, 3))

    for f, tri in enumerate(mesh.triangles):
        pts = cam_pts[tri]
        if pts[:, 2].max() < NEAR_PLANE:
            continue
        cols = colors[tri]
        if pts[:, 2].min() < NEAR_PLANE:
            pts, cols = _clip_near(pts, cols, NEAR_PLANE)
            if len(pts) < 3:
                continue
        inv_z = 1.0 / pts[:, 2]
        screen = np.stack([
            intrinsics.fx * pts[:, 0] * inv_z + intrinsics.cx,
            intrinsics.fy * pts[:, 1] * inv_z + intrinsics.cy,
        ], axis=1)
        for k in range(1, len(pts) - 1):
            idx = (0, k, k + 1)
            cov = _coverage(screen[list(idx)], w, h)
            if cov is None:
                continue
            ix, iy, bary = cov
            iz = bary @ inv_z[list(idx)]
            z = 1.0 / iz
            sel = z < depth[iy, ix]
            if not sel.any():
                continue
            ix, iy, z = ix[sel], iy[sel], z[sel]
            # perspective-correct color interpolation
            num = (bary[sel] * inv_z[list(idx)][None, :]) @ cols[list(idx)]
            depth[iy, ix] = z
            rgb[iy, ix] = num * z[:, None] * shades[f]

    hit = np.isfinite(depth)
    depth[~hit] = 0.0
    return (
        RgbImage(np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)),
        DepthImage(depth),
    )


def render_bev(
    mesh: TriangleMesh,
    resolution: int = 512,
    margin: float = 0.05,
    light: LightSpec | None = None,
) -> tuple[RgbImage, DepthImage, BevFrame]:
    """Orthographic top-down render along -Z.

    Covers the XY AABB expanded by `margin` (fraction of each extent). The
    returned height image stores the world Z of the top surface per pixel
    (0 where nothing projects); the BevFrame maps world (x, y) to pixel
    (u, v) exactly and invertibly.
    """
    if mesh.is_empty():
        raise GeometryError("cannot render an empty mesh")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    light = light or LightSpec(direction=(0.0, 0.0, -1.0))
    box = mesh.aabb()
    wx = box.extent[0]
    wy = box.extent[1]
    if max(wx, wy) == 0.0:
        raise GeometryError("mesh has zero XY extent")
    x0 = box.min[0] - margin * wx
    x1 = box.max[0] + margin * wx
    y0 = box.min[1] - margin * wy
    y1 = box.max[1] + margin * wy
    ppm = resolution / max(x1 - x0, y1 - y0)
    width = max(1, math.ceil((x1 - x0) * ppm - 1e-9))
    height = max(1, math.ceil((y1 - y0) * ppm - 1e-9))
    frame = BevFrame(x_min=x0, y_max=y1, pixels_per_meter=ppm, width=width, height=height)

    colors = _vertex_colors(mesh)
    shades = _face_shades(mesh, light)
    screen_all = frame.world_to_pixel(mesh.vertices[:, :2])

    top = np.full((height, width), -np.inf)
    rgb = np.zeros((height, width, 3))

    for f, tri in enumerate(mesh.triangles):
        cov = _coverage(screen_all[tri], width, height)
        if cov is None:
            continue
        ix, iy, bary = cov
        z = bary @ mesh.vertices[tri, 2]
        sel = z > top[iy, ix]
        if not sel.any():
            continue
        ix, iy = ix[sel], iy[sel]
        top[iy, ix] = z[sel]
        rgb[iy, ix] = (bary[sel] @ colors[tri]) * shades[f]

    hit = np.isfinite(top)
    top[~hit] = 0.0
    return (
        RgbImage(np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)),
        DepthImage(top),
        frame,
    )
