"""Pinhole cameras and viewpoint generation.

Camera axes: X right, Y down, Z forward. Poses carry position plus
pitch (positive above the horizon) and yaw (CCW from +X about world +Z);
roll is identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError
from .geometry import Aabb, _as_readonly

# Elevation band and shell radii for random look-at viewpoints: the model
# stays in frame and straight-down degenerate views are avoided.
RANDOM_RADIUS_RANGE = (1.5, 2.5)
RANDOM_ELEVATION_RANGE = (math.radians(15.0), math.radians(75.0))


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point outside image")


def default_intrinsics(width: int = 224, height: int = 224, focal: float = 256.0) -> CameraIntrinsics:
    """224x224 with fx=fy=256: a unit model fills ~70% of frame at 2r distance."""
    return CameraIntrinsics(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0,
                            width=width, height=height)


@dataclass(frozen=True)
class TrajectoryWaypoint:
    x: float
    y: float
    z: float
    pitch: float  # radians
    yaw: float  # radians

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z, self.pitch, self.yaw)):
            raise ValueError("waypoint has non-finite component")


@dataclass(frozen=True)
class CameraPose:
    """World-from-camera pose parameterized by position, pitch and yaw."""

    position: np.ndarray
    pitch: float
    yaw: float
    rotation: np.ndarray = field(init=False)  # world-from-camera basis, columns (right, down, fwd)

    def __post_init__(self):
        if abs(self.pitch) > math.pi / 2 + 1e-12:
            raise ValueError("|pitch| must be <= pi/2")
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        object.__setattr__(self, "position", _as_readonly(pos))
        r = _rotation_from_pitch_yaw(self.pitch, self.yaw)
        if abs(np.linalg.det(r) - 1.0) > 1e-9 or np.abs(r @ r.T - np.eye(3)).max() > 1e-9:
            raise ValueError("derived rotation is not orthonormal")
        object.__setattr__(self, "rotation", _as_readonly(r))

    @property
    def forward(self) -> np.ndarray:
        return self.rotation[:, 2]

    @property
    def world_from_camera(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.position
        return m

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return (p - self.position) @ self.rotation

    def camera_to_world(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.position


def _rotation_from_pitch_yaw(pitch: float, yaw: float) -> np.ndarray:
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    fwd = np.array([cp * cy, cp * sy, sp])
    if abs(cp) < 1e-12:
        # gimbal case: right from yaw alone, the limit of normalize(fwd x z)
        # as pitch -> +-pi/2, so the pose stays continuous
        right = np.array([sy, -cy, 0.0])
    else:
        right = np.cross(fwd, np.array([0.0, 0.0, 1.0]))
        right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    down /= np.linalg.norm(down)
    return np.column_stack([right, down, fwd])


def pose_from_waypoint(wp: TrajectoryWaypoint) -> CameraPose:
    if abs(wp.pitch) > math.pi / 2 + 1e-12:
        raise ValueError("|pitch| must be <= pi/2")
    return CameraPose(np.array([wp.x, wp.y, wp.z]), wp.pitch, wp.yaw)


def look_at_pose(position: np.ndarray, target: np.ndarray) -> CameraPose:
    """Pose at `position` whose forward axis points exactly at `target`."""
    position = np.asarray(position, dtype=np.float64).reshape(3)
    target = np.asarray(target, dtype=np.float64).reshape(3)
    d = target - position
    dist = np.linalg.norm(d)
    if dist == 0.0:
        raise ValueError("camera position coincides with target")
    f = d / dist
    yaw = math.atan2(f[1], f[0])
    pitch = math.asin(max(-1.0, min(1.0, f[2])))
    return CameraPose(position, pitch, yaw)


def random_viewpoints(mesh_bounds: Aabb, n: int, seed: int) -> list[CameraPose]:
    """n look-at poses on a spherical shell around the bounds center.

    Shell radius is uniform in [1.5, 2.5] x bounding-sphere radius, azimuth
    uniform in [0, 2pi), elevation uniform in [15 deg, 75 deg] above the
    horizontal plane through the center. Deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    r = mesh_bounds.bounding_sphere_radius
    if r == 0.0:
        raise DegenerateGeometryError("bounds have zero extent")
    center = mesh_bounds.center
    rng = np.random.default_rng(seed)
    poses = []
    for _ in range(n):
        radius = rng.uniform(RANDOM_RADIUS_RANGE[0] * r, RANDOM_RADIUS_RANGE[1] * r)
        azimuth = rng.uniform(0.0, 2.0 * math.pi)
        elevation = rng.uniform(*RANDOM_ELEVATION_RANGE)
        offset = radius * np.array([
            math.cos(elevation) * math.cos(azimuth),
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
        ])
        poses.append(look_at_pose(center + offset, center))
    return poses
