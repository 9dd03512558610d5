"""Partial point clouds by multi-view depth back-projection.

Renders depth images of a model, back-projects single views, then combines
random subsets of 1-3 views into fixed-size partial clouds the way the
dataset builder does.
"""

from pathlib import Path

import numpy as np

from sceneforge import (
    TriangleMesh,
    default_intrinsics,
    generate_partials,
    normalize_to_unit_cube,
    random_viewpoints,
    render,
    save_point_cloud,
)
from sceneforge.partial import ViewBundle, backproject

out_dir = Path("demo_output/partial_clouds")
out_dir.mkdir(parents=True, exist_ok=True)

# an L-shaped building profile, extruded
base = np.array([[0, 0], [4, 0], [4, 1.5], [1.5, 1.5], [1.5, 3], [0, 3]], dtype=float)
lower = np.column_stack([base, np.zeros(len(base))])
upper = np.column_stack([base, np.full(len(base), 2.0)])
verts = np.concatenate([lower, upper])
caps = [(0, 1, 2), (0, 2, 3), (0, 3, 5), (3, 4, 5)]
tris = []
for a, b, c in caps:
    tris.append((a, b, c))
    tris.append((a + 6, b + 6, c + 6))
for i in range(6):
    j = (i + 1) % 6
    tris.append((i, j, j + 6))
    tris.append((i, j + 6, i + 6))
mesh, _ = normalize_to_unit_cube(TriangleMesh(verts, np.asarray(tris)))

intr = default_intrinsics()
poses = random_viewpoints(mesh.aabb(), 6, seed=21)
views = []
for pose in poses:
    _, depth = render(mesh, intr, pose)
    views.append(ViewBundle(depth, intr, pose))

# a single depth view covers only the surface facing that camera
single = backproject(views[0])
save_point_cloud(single, out_dir / "single_view.ply")
print(f"single view back-projects to {len(single)} points (one side of the model)")

# the builder combines 1-3 random views per partial and resamples to 2048
partials = generate_partials(mesh, n_sets=5, views_per_model=6, n_points=2048, seed=22)
for k, partial in enumerate(partials):
    save_point_cloud(partial.cloud, out_dir / f"partial_{k:02d}.ply")
    spread = partial.cloud.aabb().extent
    print(f"partial {k}: views {partial.view_indices}, {len(partial.cloud)} points, "
          f"extent {spread[0]:.2f} x {spread[1]:.2f} x {spread[2]:.2f}")
