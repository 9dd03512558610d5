"""Scene-to-objects pipeline: BEV mask -> mask-driven mesh slicing ->
relevance filtering -> per-object sub-meshes.

Slicing assigns every triangle to the mask label under its centroid's BEV
projection. Triangles whose vertices straddle labels are first split along
the label boundary (one planar cut per boundary edge, found by bisection in
mask space), which keeps the result a partition: total surface area is
conserved and no triangle lands in two segments.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .camera import default_intrinsics, random_viewpoints
from .errors import EmptyRegionError, GeometryError, ProviderError
from .geometry import TriangleMesh
from .providers import (
    FOREGROUND,
    LabelMask,
    PromptPoint,
    PromptSet,
    ProviderConfig,
    RelevanceScore,
    above_ground_mask,
    request_mask,
    score_relevance,
)
from .raster import BevFrame, render, render_bev
from .util import stable_seed

PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"

_BISECT_ITERS = 30


@dataclass
class SegmentRecord:
    """One sliced object. Immutable except `status` (pending -> decided once)."""

    id: str
    label: int
    submesh: TriangleMesh
    relevance: RelevanceScore | None = None
    status: str = PENDING
    provenance: str = "manual"

    def decide(self, decision: str) -> bool:
        """Apply accept/reject. Returns False for a repeated identical decision;
        raises on a conflicting one."""
        if decision not in (ACCEPTED, REJECTED):
            raise ValueError(f"bad decision '{decision}'")
        if self.status == decision:
            return False
        if self.status != PENDING:
            raise ValueError(f"segment {self.id} already {self.status}")
        self.status = decision
        return True


@dataclass(frozen=True)
class SliceReport:
    per_label_counts: dict[int, int]
    unassigned: int
    boundary_split: int  # original triangles that needed splitting

    @property
    def total_triangles(self) -> int:
        return sum(self.per_label_counts.values()) + self.unassigned


@dataclass(frozen=True)
class SegmentationParams:
    bev_resolution: int = 512
    bev_margin: float = 0.05
    auto_grid: int = 32
    relevance_views: int = 4
    relevance_threshold: float = 0.5
    relevance_category: str = "building"


def _label_at(mask: LabelMask, frame: BevFrame, points_xy: np.ndarray) -> np.ndarray:
    idx = frame.pixel_index(points_xy)
    return mask.labels[idx[..., 1], idx[..., 0]].astype(np.int64)


def _bisect_transition(mask, frame, p0, p1, l0):
    """Point on segment p0-p1 (3D) where the BEV label stops being l0."""
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        pm = p0 + mid * (p1 - p0)
        if _label_at(mask, frame, pm[:2].reshape(1, 2))[0] == l0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return p0 + t * (p1 - p0), t


def slice_by_mask(
    scene: TriangleMesh,
    mask: LabelMask,
    bev_frame: BevFrame,
) -> tuple[list[SegmentRecord], SliceReport]:
    """Partition scene triangles into per-label sub-meshes.

    Label-0 triangles stay unassigned. Each nonzero label with at least one
    triangle yields a SegmentRecord whose submesh has compacted vertices.
    """
    if (mask.height, mask.width) != (bev_frame.height, bev_frame.width):
        raise ValueError("mask dimensions do not match the BEV frame grid")
    if mask.n_labels == 0:
        warnings.warn("mask is all background; nothing to slice")
        return [], SliceReport({}, unassigned=scene.n_triangles, boundary_split=0)

    verts = list(scene.vertices)
    cols = list(scene.vertex_colors) if scene.vertex_colors is not None else None

    def add_vertex(p, c):
        verts.append(p)
        if cols is not None:
            cols.append(c)
        return len(verts) - 1

    vertex_labels = _label_at(mask, frame=bev_frame, points_xy=scene.vertices[:, :2])

    pieces: list[tuple[int, int, int]] = []  # triangle index triples, post split
    piece_owner: list[int] = []  # mask label per piece
    n_split = 0

    for tri in scene.triangles:
        i0, i1, i2 = (int(tri[0]), int(tri[1]), int(tri[2]))
        l0, l1, l2 = vertex_labels[i0], vertex_labels[i1], vertex_labels[i2]
        if l0 == l1 == l2:
            sub = [(i0, i1, i2)]
        else:
            n_split += 1
            sub = _split_triangle(scene, mask, bev_frame, (i0, i1, i2), (l0, l1, l2), add_vertex, cols)
        for t in sub:
            centroid = (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 3.0
            owner = int(_label_at(mask, bev_frame, centroid[:2].reshape(1, 2))[0])
            pieces.append(t)
            piece_owner.append(owner)

    verts = np.asarray(verts)
    cols = np.asarray(cols) if cols is not None else None
    owners = np.asarray(piece_owner)
    pieces = np.asarray(pieces, dtype=np.int64).reshape(-1, 3)

    per_label: dict[int, int] = {}
    records = []
    for label in range(1, mask.n_labels + 1):
        sel = owners == label
        count = int(sel.sum())
        if count == 0:
            continue
        per_label[label] = count
        tris = pieces[sel]
        used = np.unique(tris)
        remap = np.full(len(verts), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        submesh = TriangleMesh(
            verts[used],
            remap[tris],
            cols[used] if cols is not None else None,
        )
        records.append(SegmentRecord(id=f"seg-{label:03d}", label=label, submesh=submesh))
    report = SliceReport(
        per_label_counts=per_label,
        unassigned=int((owners == 0).sum()),
        boundary_split=n_split,
    )
    return records, report


def _split_triangle(scene, mask, frame, idx, labels, add_vertex, cols):
    """Split one boundary-crossing triangle; returns index triples."""
    i0, i1, i2 = idx
    l0, l1, l2 = labels
    v = scene.vertices
    c = scene.vertex_colors

    def cut(ia, ib, la):
        pa, pb = v[ia], v[ib]
        point, t = _bisect_transition(mask, frame, pa, pb, la)
        color = None
        if cols is not None:
            color = c[ia] + t * (c[ib] - c[ia])
        return add_vertex(point, color)

    if l0 != l1 and l1 != l2 and l0 != l2:
        # three-way corner: one cut per edge, 4 pieces
        m01 = cut(i0, i1, l0)
        m12 = cut(i1, i2, l1)
        m20 = cut(i2, i0, l2)
        return [(i0, m01, m20), (i1, m12, m01), (i2, m20, m12), (m01, m12, m20)]

    # two labels: isolate the odd vertex, cut its two edges
    if l1 == l2:
        o, a, b = i0, i1, i2
        lo = l0
    elif l0 == l2:
        o, a, b = i1, i2, i0
        lo = l1
    else:
        o, a, b = i2, i0, i1
        lo = l2
    m_oa = cut(o, a, lo)
    m_ob = cut(o, b, lo)
    return [(o, m_oa, m_ob), (m_oa, a, b), (m_oa, b, m_ob)]


def segment_scene_manual(
    scene: TriangleMesh,
    prompts: PromptSet,
    providers: ProviderConfig,
    params: SegmentationParams | None = None,
) -> list[SegmentRecord]:
    """Prompt-driven slicing; records come back pending for human review."""
    params = params or SegmentationParams()
    if scene.is_empty():
        raise GeometryError("cannot segment an empty scene")
    rgb, height, frame = render_bev(scene, params.bev_resolution, params.bev_margin)
    mask = request_mask(providers, rgb, prompts, height_image=height)
    if mask.n_labels == 0:
        raise EmptyRegionError("prompts produced an empty mask")
    records, _ = slice_by_mask(scene, mask, frame)
    for r in records:
        r.provenance = "manual"
    return records


def segment_scene_auto(
    scene: TriangleMesh,
    providers: ProviderConfig,
    params: SegmentationParams | None = None,
) -> list[SegmentRecord]:
    """Automatic mode: lattice prompts -> mask -> slice -> relevance filter.

    Segments scoring at or above the threshold are accepted, below rejected;
    a failed score leaves the record pending.
    """
    params = params or SegmentationParams()
    if scene.is_empty():
        raise GeometryError("cannot segment an empty scene")
    rgb, height, frame = render_bev(scene, params.bev_resolution, params.bev_margin)

    try:
        above, _ = above_ground_mask(height, providers)
    except EmptyRegionError:
        warnings.warn("scene has no surface in BEV; no segments")
        return []
    points = []
    g = params.auto_grid
    for j in range(g):
        for i in range(g):
            u = int((i + 0.5) * frame.width / g)
            v = int((j + 0.5) * frame.height / g)
            if u < frame.width and v < frame.height and above[v, u]:
                points.append(PromptPoint(u=u, v=v, polarity=FOREGROUND))
    if not points:
        warnings.warn("no above-ground lattice points; no segments")
        return []

    mask = request_mask(providers, rgb, PromptSet(points=tuple(points)), height_image=height)
    records, _ = slice_by_mask(scene, mask, frame)
    for r in records:
        r.provenance = "automatic"

    def score_one(record: SegmentRecord):
        views = render_segment_views(record.submesh, params.relevance_views,
                                     seed=stable_seed("relevance", record.id))
        return score_relevance(providers, views, params.relevance_category)

    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = {r.id: pool.submit(score_one, r) for r in records}
        for r in records:
            try:
                score = futures[r.id].result()
            except ProviderError:
                continue  # stays pending
            r.relevance = RelevanceScore(score.score, score.label, segment_id=r.id,
                                         provenance=score.provenance)
            r.status = ACCEPTED if score.score >= params.relevance_threshold else REJECTED
    return records


def render_segment_views(submesh: TriangleMesh, n_views: int, seed: int):
    """Random-mode RGB renders of a segment, used for scoring and captions."""
    intr = default_intrinsics()
    poses = random_viewpoints(submesh.aabb(), n_views, seed)
    return [render(submesh, intr, pose)[0] for pose in poses]
