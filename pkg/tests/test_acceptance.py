"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import contextlib
import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from sceneforge.camera import default_intrinsics, random_viewpoints
from sceneforge.dataset import GenerationParams, build_dataset, validate_dataset
from sceneforge.geometry import PointCloud, TriangleMesh, normalize_to_unit_cube, surface_area
from sceneforge.meshio import load_point_cloud, save_mesh
from sceneforge.metrics import MetricsConfig, evaluate
from sceneforge.partial import ViewBundle, backproject
from sceneforge.providers import LabelMask, ProviderConfig
from sceneforge.raster import render, render_bev
from sceneforge.segmentation import SegmentationParams, segment_scene_auto, slice_by_mask

from conftest import (
    SCENE_BEV_MARGIN,
    SCENE_BEV_RESOLUTION,
    SCENE_FOOTPRINTS,
    boxes_scene,
    box_mesh,
    exact_mask,
    footprint_box,
)
from oracles import brute_metrics, point_to_mesh_distance
from test_raster import terrain_mesh


@contextlib.contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {title}")
        raise
    print(f"[PASS] criterion {number}: {title}")


def test_criterion_1_metrics_oracle_equivalence():
    with criterion(1, "metrics match O(n^2) brute force within 1e-12 rel on 50 pairs, < 30 s"):
        rng = np.random.default_rng(101)
        start = time.perf_counter()
        for _ in range(50):
            n, m = rng.integers(512, 2049, size=2)
            p = rng.random((n, 3)) * 0.02
            q = rng.random((m, 3)) * 0.02
            report = evaluate(PointCloud(p), PointCloud(q), MetricsConfig())
            ref = brute_metrics(p, q, tau=0.001, auc_range=(1e-4, 1e-2), auc_samples=64)
            for key, expected in ref.items():
                got = getattr(report, key)
                assert got == pytest.approx(expected, rel=1e-12, abs=1e-15), (
                    f"{key}: {got} vs {expected}")
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.1f} s"


def test_criterion_2_metric_identities():
    with criterion(2, "evaluate(P,P) is exact; hand case CD=0.25, P=0.5, R=1, F=2/3"):
        rng = np.random.default_rng(202)
        for _ in range(10):
            pts = PointCloud(rng.random((rng.integers(128, 1024), 3)))
            report = evaluate(pts, pts)
            assert report.l1_cd == 0.0 and report.l2_cd == 0.0
            assert report.precision == 1.0 and report.recall == 1.0
            assert report.fscore == 1.0
            assert report.auc == pytest.approx(1.0, abs=1e-15)

        pred = PointCloud([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        gt = PointCloud([[0.0, 0.0, 0.0]])
        config = MetricsConfig(tau=0.5)
        report = evaluate(pred, gt, config)
        assert report.l2_cd == pytest.approx(0.25, abs=1e-9)
        assert report.precision == pytest.approx(0.5, abs=1e-9)
        assert report.recall == pytest.approx(1.0, abs=1e-9)
        assert report.fscore == pytest.approx(2 / 3, abs=1e-9)


def test_criterion_3_auc_step_function():
    with criterion(3, "AUC of F stepping 0->1 at tau=1e-3 equals 0.5 within 1/(K-1)"):
        pred = PointCloud([[0.0, 0.0, 0.0]])
        gt = PointCloud([[1e-3, 0.0, 0.0]])
        report = evaluate(pred, gt, MetricsConfig(auc_samples=64))
        assert report.auc == pytest.approx(0.5, abs=1.0 / 63)


def test_criterion_4_render_backproject_roundtrip():
    with criterion(4, "20 views of a 128-triangle mesh back-project onto the surface, < 10 s"):
        start = time.perf_counter()
        mesh = terrain_mesh(n=9, seed=40)  # 128 triangles
        assert mesh.n_triangles <= 200
        intr = default_intrinsics()
        diameter = mesh.aabb().bounding_sphere_radius * 2
        poses = random_viewpoints(mesh.aabb(), 20, seed=41)
        for pose in poses:
            _, depth = render(mesh, intr, pose)
            cloud = backproject(ViewBundle(depth, intr, pose))
            assert len(cloud) > 0
            dist = point_to_mesh_distance(cloud.points, mesh)
            assert (dist < 1e-4 * diameter).mean() >= 0.99
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f} s"


def test_criterion_5_normalization():
    with criterion(5, "20 random meshes normalize to a centered unit cube, idempotently"):
        rng = np.random.default_rng(505)
        for _ in range(20):
            verts = rng.normal(size=(24, 3)) * rng.uniform(0.05, 100.0, size=3)
            tris = np.array([(i, i + 1, i + 2) for i in range(22)])
            mesh = TriangleMesh(verts, tris)
            normed, _ = normalize_to_unit_cube(mesh)
            box = normed.aabb()
            assert box.max_extent == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(box.center, 0.0, atol=1e-9)
            twice, transform = normalize_to_unit_cube(normed)
            np.testing.assert_allclose(twice.vertices, normed.vertices, atol=1e-9)
            assert transform.scale == pytest.approx(1.0, abs=1e-9)


def test_criterion_6_slicing_partition():
    with criterion(6, "2-5 disjoint boxes recover exactly; area conserved on boundary cuts"):
        for n_boxes in (2, 3, 4, 5):
            scene = boxes_scene(n_boxes, with_ground=False)
            _, _, frame = render_bev(scene, SCENE_BEV_RESOLUTION, SCENE_BEV_MARGIN)
            mask = LabelMask(exact_mask(frame, SCENE_FOOTPRINTS[:n_boxes]))
            records, report = slice_by_mask(scene, mask, frame)
            assert len(records) == n_boxes
            assert report.unassigned == 0
            for k, rec in enumerate(records):
                box = footprint_box(SCENE_FOOTPRINTS[k])
                assert rec.submesh.n_triangles == 12
                got = np.asarray(sorted(map(tuple, np.round(rec.submesh.vertices, 9))))
                want = np.asarray(sorted(map(tuple, np.round(box.vertices, 9))))
                np.testing.assert_array_equal(got, want)

        # boundary-crossing variant: a label boundary cuts straight through
        # the first box's footprint
        scene = boxes_scene(3, with_ground=False)
        _, _, frame = render_bev(scene, SCENE_BEV_RESOLUTION, SCENE_BEV_MARGIN)
        fp = SCENE_FOOTPRINTS[0]
        cut_u = int(frame.world_to_pixel(
            np.array([[(fp["x"][0] + fp["x"][1]) / 2, 0.0]]))[0, 0])
        labels = np.zeros((frame.height, frame.width), dtype=np.uint16)
        labels[:, :cut_u] = 1
        labels[:, cut_u:] = 2
        records, report = slice_by_mask(scene, LabelMask(labels), frame)
        assert report.boundary_split > 0
        total = sum(surface_area(r.submesh) for r in records)
        assert total == pytest.approx(surface_area(scene), rel=1e-6)


def tree_digest(root: Path) -> dict:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_criterion_7_dataset_build(tmp_path):
    with criterion(7, "10 models x (15 rgb + 15 depth + 15 cams + 15x2048 partials + 2048 GT),"
                      " 7/3 split, validate green, byte-identical rebuild, < 2 min"):
        start = time.perf_counter()
        mesh_dir = tmp_path / "meshes"
        mesh_dir.mkdir()
        rng = np.random.default_rng(707)
        for k in range(10):
            mesh = box_mesh(center=(k * 2.0, 0.0, 0.0),
                            size=tuple(rng.uniform(0.5, 2.0, size=3)))
            save_mesh(mesh, mesh_dir / f"toy{k}.ply")
        inputs = sorted(mesh_dir.iterdir())
        params = GenerationParams(views=15, n_points=2048, seed=42, workers=4)

        out = tmp_path / "dataset"
        manifest = build_dataset(inputs, out, params)
        assert len(manifest.models) == 10 and not manifest.failures
        splits = [m.split for m in manifest.models]
        assert splits.count("train") == 7 and splits.count("test") == 3
        for entry in manifest.models:
            assert len(entry.rgb_paths) == 15
            assert len(entry.depth_paths) == 15
            assert len(entry.camera_paths) == 15
            assert len(entry.partial_paths) == 15
            assert len(load_point_cloud(out / entry.gt_path)) == 2048
            for rel in entry.partial_paths:
                assert len(load_point_cloud(out / rel)) == 2048

        report = validate_dataset(out / "manifest.json")
        assert report.passed, [c for c in report.checks if not c.ok]

        out_b = tmp_path / "dataset_rebuild"
        build_dataset(inputs, out_b, params)
        assert tree_digest(out) == tree_digest(out_b)
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"took {elapsed:.1f} s"


def test_criterion_8_hermetic_pipeline(tmp_path, monkeypatch):
    with criterion(8, "auto-segment -> build -> evaluate, fallback providers only,"
                      " 3 accepted segments"):
        # hermetic: no provider URLs configured anywhere
        for name in ("SCENEFORGE_MASK_URL", "SCENEFORGE_SCORE_URL", "SCENEFORGE_CAPTION_URL"):
            monkeypatch.delenv(name, raising=False)
        providers = ProviderConfig()
        assert providers.mask_url is None and providers.score_url is None

        scene = boxes_scene(3)
        params = SegmentationParams(bev_resolution=SCENE_BEV_RESOLUTION,
                                    bev_margin=SCENE_BEV_MARGIN)
        records = segment_scene_auto(scene, providers, params)
        accepted = [r for r in records if r.status == "accepted"]
        assert len(accepted) == 3
        assert all(r.relevance is not None and r.relevance.provenance == "unscored"
                   for r in accepted)

        out = tmp_path / "dataset"
        manifest = build_dataset(accepted, out,
                                 GenerationParams(views=15, n_points=2048, seed=8, workers=4),
                                 providers)
        assert len(manifest.models) == 3 and not manifest.failures

        entry = manifest.models[0]
        gt = load_point_cloud(out / entry.gt_path)
        partial = load_point_cloud(out / entry.partial_paths[0])
        report = evaluate(partial, gt, MetricsConfig())
        assert np.isfinite(report.l1_cd) and report.l1_cd > 0
        assert 0.0 <= report.fscore <= 1.0
        assert 0.0 <= report.auc <= 1.0
