import numpy as np
import pytest

from sceneforge.geometry import TriangleMesh

# corners indexed by bits: idx = x + 2*y + 4*z
BOX_TRIANGLES = np.array([
    (0, 2, 3), (0, 3, 1),  # bottom
    (4, 5, 7), (4, 7, 6),  # top
    (0, 1, 5), (0, 5, 4),  # front  (y-)
    (2, 6, 7), (2, 7, 3),  # back   (y+)
    (0, 4, 6), (0, 6, 2),  # left   (x-)
    (1, 3, 7), (1, 7, 5),  # right  (x+)
], dtype=np.int64)


def box_mesh(center=(0.0, 0.0, 0.0), size=(1.0, 1.0, 1.0), color=None) -> TriangleMesh:
    center = np.asarray(center, dtype=np.float64)
    half = np.asarray(size, dtype=np.float64) / 2.0
    corners = np.array([
        [center[0] + (1 if x else -1) * half[0],
         center[1] + (1 if y else -1) * half[1],
         center[2] + (1 if z else -1) * half[2]]
        for z in (0, 1) for y in (0, 1) for x in (0, 1)
    ])
    colors = None
    if color is not None:
        colors = np.tile(np.asarray(color, dtype=np.float64), (8, 1))
    return TriangleMesh(corners, BOX_TRIANGLES, colors)


def ground_quad(x0, x1, y0, y1, z=0.0) -> TriangleMesh:
    verts = np.array([[x0, y0, z], [x1, y0, z], [x1, y1, z], [x0, y1, z]])
    tris = np.array([(0, 1, 2), (0, 2, 3)], dtype=np.int64)
    return TriangleMesh(verts, tris)


def merge_meshes(meshes) -> TriangleMesh:
    verts = []
    tris = []
    offset = 0
    has_colors = all(m.vertex_colors is not None for m in meshes)
    colors = [] if has_colors else None
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        if has_colors:
            colors.append(m.vertex_colors)
        offset += m.n_vertices
    return TriangleMesh(
        np.concatenate(verts),
        np.concatenate(tris),
        np.concatenate(colors) if has_colors else None,
    )


@pytest.fixture
def unit_cube():
    return box_mesh()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- synthetic segmentation scenes ----------------------------------------
#
# Box footprints are placed so that, at a 400px BEV over the [-2, 2] ground
# window (100 px/m, margin 0), every footprint edge falls a quarter pixel
# inside its pixel: all box vertices and centroids then project into labeled
# pixels and no triangle straddles a label boundary.

SCENE_BEV_RESOLUTION = 400
SCENE_BEV_MARGIN = 0.0
GROUND_Z = 0.02

SCENE_FOOTPRINTS = [
    {"x": (-1.3975, -0.5925), "y": (-0.3975, 0.4075), "h": 1.0},
    {"x": (0.6025, 1.4075), "y": (-0.3975, 0.4075), "h": 0.5},
    {"x": (-0.3975, 0.4075), "y": (0.6025, 1.4075), "h": 0.75},
    {"x": (0.6025, 1.4075), "y": (0.6025, 1.4075), "h": 1.25},
    {"x": (-1.3975, -0.5925), "y": (0.6025, 1.4075), "h": 0.35},
]


def footprint_box(fp) -> TriangleMesh:
    x0, x1 = fp["x"]
    y0, y1 = fp["y"]
    return box_mesh(
        center=((x0 + x1) / 2, (y0 + y1) / 2, GROUND_Z + fp["h"] / 2),
        size=(x1 - x0, y1 - y0, fp["h"]),
    )


def boxes_scene(n_boxes: int, with_ground: bool = True) -> TriangleMesh:
    parts = [footprint_box(fp) for fp in SCENE_FOOTPRINTS[:n_boxes]]
    if with_ground:
        parts.insert(0, ground_quad(-2.0, 2.0, -2.0, 2.0, z=GROUND_Z))
    return merge_meshes(parts)


def exact_mask(frame, footprints):
    """Label every pixel whose pixel square intersects each footprint."""
    labels = np.zeros((frame.height, frame.width), dtype=np.uint16)
    px = 1.0 / frame.pixels_per_meter
    x_lo = frame.x_min + np.arange(frame.width) * px
    x_hi = x_lo + px
    y_hi = frame.y_max - np.arange(frame.height) * px
    y_lo = y_hi - px
    for k, fp in enumerate(footprints, start=1):
        overlap_x = (x_hi > fp["x"][0]) & (x_lo < fp["x"][1])
        overlap_y = (y_hi > fp["y"][0]) & (y_lo < fp["y"][1])
        labels[np.outer(overlap_y, overlap_x)] = k
    return labels
