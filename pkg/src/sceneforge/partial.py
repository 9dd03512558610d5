"""Partial point clouds from multi-view depth back-projection.

Pixel centers sit at half-integer coordinates, matching the rasterizer's
coverage rule, so rendering then back-projecting recovers surface points
exactly (up to z-buffer quantization at silhouette pixels).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, CameraPose, default_intrinsics, random_viewpoints
from .errors import GeometryError
from .geometry import PointCloud, TriangleMesh
from .raster import DepthImage, render


@dataclass(frozen=True)
class ViewBundle:
    depth: DepthImage
    intrinsics: CameraIntrinsics
    pose: CameraPose

    def __post_init__(self):
        if (self.depth.height, self.depth.width) != (self.intrinsics.height, self.intrinsics.width):
            raise ValueError("depth dimensions do not match intrinsics")


@dataclass(frozen=True)
class PartialCloud:
    """A generated partial plus which source views built it."""

    cloud: PointCloud
    view_indices: tuple[int, ...]
    seed: int


def backproject(view: ViewBundle) -> PointCloud:
    """World-frame points for every valid depth pixel.

    Camera point for pixel (u, v) at depth z:
        ((u + 0.5 - cx) * z / fx, (v + 0.5 - cy) * z / fy, z)
    then world = world_from_camera applied to it. Invalid (zero) pixels are
    skipped; an all-invalid image yields an empty cloud with a warning.
    """
    z = view.depth.values
    valid = view.depth.valid_mask
    if not valid.any():
        warnings.warn("depth image has no valid pixels; empty cloud")
        return PointCloud(np.empty((0, 3)))
    vv, uu = np.nonzero(valid)
    zz = z[vv, uu]
    intr = view.intrinsics
    cam = np.stack([
        (uu + 0.5 - intr.cx) * zz / intr.fx,
        (vv + 0.5 - intr.cy) * zz / intr.fy,
        zz,
    ], axis=1)
    return PointCloud(view.pose.camera_to_world(cam))


def combine_views(views: list[ViewBundle], n_points: int, seed: int) -> PointCloud:
    """Concatenate back-projections and resample to exactly n_points.

    Oversized inputs are subsampled without replacement; undersized ones are
    resampled with replacement (duplication, never perturbation).
    """
    if not views:
        raise ValueError("need at least one view")
    if len(views) > 3:
        warnings.warn(f"{len(views)} views; the usual range is 1-3")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    clouds = [backproject(v).points for v in views]
    merged = np.concatenate(clouds, axis=0)
    if len(merged) == 0:
        raise GeometryError("all views back-projected to empty clouds")
    rng = np.random.default_rng(seed)
    if len(merged) > n_points:
        keep = rng.choice(len(merged), size=n_points, replace=False)
    elif len(merged) < n_points:
        keep = rng.choice(len(merged), size=n_points, replace=True)
    else:
        return PointCloud(merged)
    return PointCloud(merged[keep])


def combine_partial_sets(
    bundles: list[ViewBundle],
    n_sets: int,
    n_points: int,
    seed: int,
) -> list[PartialCloud]:
    """n_sets partials from pre-rendered views, each combining 1-3 of them.

    Each set picks its view count uniformly from {1, 2, 3} and its views
    without replacement. Deterministic for a fixed seed.
    """
    if len(bundles) < 3:
        raise ValueError("need at least 3 views to combine from")
    if n_sets < 1:
        raise ValueError("n_sets must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_sets):
        count = int(rng.integers(1, 4))
        chosen = tuple(int(i) for i in rng.choice(len(bundles), size=count, replace=False))
        set_seed = int(rng.integers(0, 2**63 - 1))
        cloud = combine_views([bundles[i] for i in chosen], n_points, set_seed)
        out.append(PartialCloud(cloud=cloud, view_indices=chosen, seed=set_seed))
    return out


def generate_partials(
    mesh: TriangleMesh,
    n_sets: int,
    views_per_model: int,
    n_points: int,
    seed: int,
    intrinsics: CameraIntrinsics | None = None,
) -> list[PartialCloud]:
    """n_sets partials, each from a random combination of 1-3 distinct views.

    All depth views are rendered once up front (random-mode cameras from the
    same seed), then combined via combine_partial_sets.
    """
    if views_per_model < 3:
        raise ValueError("views_per_model must be >= 3")
    intr = intrinsics or default_intrinsics()
    poses = random_viewpoints(mesh.aabb(), views_per_model, seed)
    bundles = [ViewBundle(render(mesh, intr, pose)[1], intr, pose) for pose in poses]
    return combine_partial_sets(bundles, n_sets, n_points, seed)


def make_partials(
    mesh: TriangleMesh,
    n_sets: int,
    views_per_model: int,
    n_points: int,
    seed: int,
) -> list[PointCloud]:
    return [p.cloud for p in generate_partials(mesh, n_sets, views_per_model, n_points, seed)]
