"""RGB/depth rendering in random and trajectory modes, plus bird's-eye view.

Renders a small scene from look-at viewpoints sampled on a shell, then along
an explicit circular camera trajectory, and finally top-down. Every image
gets a camera sidecar so depth can later be back-projected.
"""

import math
from pathlib import Path

import numpy as np

from sceneforge import (
    TrajectoryWaypoint,
    default_intrinsics,
    normalize_to_unit_cube,
    pose_from_waypoint,
    random_viewpoints,
    render,
    render_bev,
)
from sceneforge.imageio import save_camera_json, save_depth_png, save_rgb_png
from sceneforge.geometry import TriangleMesh

out_dir = Path("demo_output/rendering")
for sub in ("random", "trajectory", "bev"):
    (out_dir / sub).mkdir(parents=True, exist_ok=True)

# a squat pyramid on a square base
verts = np.array([
    [-1, -1, 0], [1, -1, 0], [1, 1, 0], [-1, 1, 0], [0, 0, 1.2],
], dtype=float)
tris = np.array([(0, 1, 2), (0, 2, 3), (0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)])
colors = np.array([[0.8, 0.3, 0.2]] * 4 + [[0.9, 0.9, 0.2]])
mesh, _ = normalize_to_unit_cube(TriangleMesh(verts, tris, colors))

intr = default_intrinsics()

# random mode: viewpoints on a shell, always looking at the model
for i, pose in enumerate(random_viewpoints(mesh.aabb(), 4, seed=11)):
    rgb, depth = render(mesh, intr, pose)
    save_rgb_png(rgb, out_dir / "random" / f"{i:02d}_rgb.png")
    save_depth_png(depth, out_dir / "random" / f"{i:02d}_depth.png")
    save_camera_json(intr, pose, out_dir / "random" / f"{i:02d}_cam.json")
print(f"random mode: 4 views -> {out_dir / 'random'}")

# trajectory mode: an explicit circular path, pitch 25 degrees down
for i in range(8):
    angle = 2 * math.pi * i / 8
    wp = TrajectoryWaypoint(
        x=1.5 * math.cos(angle), y=1.5 * math.sin(angle), z=0.9,
        pitch=math.radians(-25.0), yaw=angle + math.pi,
    )
    rgb, depth = render(mesh, intr, pose_from_waypoint(wp))
    save_rgb_png(rgb, out_dir / "trajectory" / f"{i:02d}_rgb.png")
print(f"trajectory mode: 8 waypoints -> {out_dir / 'trajectory'}")

# bird's-eye view: the height image drives mask-based segmentation
rgb, height, frame = render_bev(mesh, resolution=256, margin=0.1)
save_rgb_png(rgb, out_dir / "bev" / "rgb.png")
save_depth_png(height, out_dir / "bev" / "height.png")
peak = height.values.max()
print(f"BEV: {frame.width}x{frame.height} px at {frame.pixels_per_meter:.1f} px/m, "
      f"peak height {peak:.3f} m")
