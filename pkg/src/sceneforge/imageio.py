"""PNG and camera-sidecar serialization.

RGB images are 8-bit PNG. Depth images are 16-bit grayscale PNG storing
millimeters: value = round(depth_m * 1000), 0 = invalid, saturating at 65535.
Each rendered image gets a JSON sidecar with intrinsics and the 4x4
world-from-camera matrix (16 floats, row-major).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image

from .camera import CameraIntrinsics, CameraPose
from .raster import DepthImage, RgbImage

DEPTH_SCALE = 1000.0  # millimeters per meter


def save_rgb_png(image: RgbImage, path) -> None:
    Image.fromarray(image.pixels).save(Path(path), format="PNG")


def load_rgb_png(path) -> RgbImage:
    with Image.open(Path(path)) as im:
        return RgbImage(np.asarray(im.convert("RGB"), dtype=np.uint8))


def save_depth_png(depth: DepthImage, path) -> None:
    mm = np.round(np.clip(depth.values, 0.0, None) * DEPTH_SCALE)
    encoded = np.clip(mm, 0, 65535).astype(np.uint16)
    Image.fromarray(encoded).save(Path(path), format="PNG")


def load_depth_png(path) -> DepthImage:
    with Image.open(Path(path)) as im:
        raw = np.asarray(im, dtype=np.uint16)
    return DepthImage(raw.astype(np.float64) / DEPTH_SCALE)


def save_camera_json(intrinsics: CameraIntrinsics, pose: CameraPose, path) -> None:
    payload = {
        "fx": intrinsics.fx,
        "fy": intrinsics.fy,
        "cx": intrinsics.cx,
        "cy": intrinsics.cy,
        "width": intrinsics.width,
        "height": intrinsics.height,
        "world_from_camera": [float(v) for v in pose.world_from_camera.reshape(-1)],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_camera_json(path) -> tuple[CameraIntrinsics, CameraPose]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    intr = CameraIntrinsics(
        fx=data["fx"], fy=data["fy"], cx=data["cx"], cy=data["cy"],
        width=data["width"], height=data["height"],
    )
    m = np.asarray(data["world_from_camera"], dtype=np.float64).reshape(4, 4)
    pose = pose_from_matrix(m)
    return intr, pose


def pose_from_matrix(world_from_camera: np.ndarray) -> CameraPose:
    """Recover a (position, pitch, yaw) pose from a roll-free 4x4 matrix."""
    m = np.asarray(world_from_camera, dtype=np.float64).reshape(4, 4)
    fwd = m[:3, 2]
    pitch = math.asin(max(-1.0, min(1.0, fwd[2])))
    if abs(fwd[0]) < 1e-12 and abs(fwd[1]) < 1e-12:
        # straight up/down: forward carries no yaw, use the right axis
        yaw = math.atan2(m[0, 0], -m[1, 0])
    else:
        yaw = math.atan2(fwd[1], fwd[0])
    return CameraPose(m[:3, 3], pitch, yaw)
