"""Command-line driver composing the library for batch use.

Exit codes: 0 success, 1 partial failure, 2 usage error. Deterministic
under a fixed --seed. Provider endpoints come from --providers (JSON file)
overridden by SCENEFORGE_* environment variables.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import __version__
from .camera import default_intrinsics, pose_from_waypoint, random_viewpoints, TrajectoryWaypoint
from .dataset import GenerationParams, build_dataset, import_external, validate_dataset
from .errors import SceneForgeError
from .geometry import normalize_to_unit_cube
from .imageio import load_camera_json, load_depth_png, save_camera_json, save_depth_png, save_rgb_png
from .meshio import load_mesh, save_mesh, save_point_cloud
from .metrics import MetricsConfig, evaluate, evaluate_batch, read_pairs_file
from .partial import ViewBundle, backproject, combine_views
from .providers import ProviderConfig, caption_segment
from .raster import render
from .segmentation import SegmentationParams, render_segment_views, segment_scene_auto
from .util import write_json_atomic


def _provider_config(args) -> ProviderConfig:
    if getattr(args, "providers", None):
        return ProviderConfig.from_file(args.providers)
    return ProviderConfig().with_env_overrides()


def _cmd_segment(args) -> int:
    scene_dir = Path(args.scenes)
    meshes = sorted(p for p in scene_dir.iterdir() if p.suffix.lower() in (".obj", ".ply")) \
        if scene_dir.is_dir() else [scene_dir]
    if not meshes:
        print(f"no scene meshes in {scene_dir}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    providers = _provider_config(args)
    params = SegmentationParams(auto_grid=args.grid)
    failures = 0
    for mesh_path in meshes:
        try:
            records = segment_scene_auto(load_mesh(mesh_path), providers, params)
        except SceneForgeError as e:
            print(f"{mesh_path.name}: {e}", file=sys.stderr)
            failures += 1
            continue
        manifest = []
        for rec in records:
            fname = f"{mesh_path.stem}-{rec.id}.ply"
            save_mesh(rec.submesh, out_dir / fname)
            manifest.append({
                "id": rec.id, "label": rec.label,
                "triangle_count": rec.submesh.n_triangles,
                "relevance": rec.relevance.score if rec.relevance else None,
                "status": rec.status, "provenance": rec.provenance,
                "file": fname,
            })
        write_json_atomic(out_dir / f"{mesh_path.stem}-segments.json", manifest)
        accepted = sum(1 for m in manifest if m["status"] == "accepted")
        print(f"{mesh_path.name}: {len(manifest)} segments, {accepted} accepted")
    return 1 if failures else 0


def _read_trajectory(path) -> list[TrajectoryWaypoint]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    waypoints = []
    for row in rows:
        waypoints.append(TrajectoryWaypoint(
            x=float(row["x"]), y=float(row["y"]), z=float(row["z"]),
            pitch=math.radians(float(row["pitch"])),
            yaw=math.radians(float(row["yaw"])),
        ))
    return waypoints


def _cmd_render(args) -> int:
    mesh = load_mesh(args.mesh)
    if args.normalize:
        mesh, _ = normalize_to_unit_cube(mesh)
    intr = default_intrinsics(args.width, args.height)
    if args.mode == "random":
        poses = random_viewpoints(mesh.aabb(), args.views, args.seed)
    else:
        if not args.traj:
            print("trajectory mode needs --traj CSV", file=sys.stderr)
            return 2
        poses = [pose_from_waypoint(wp) for wp in _read_trajectory(args.traj)]
    out = Path(args.out)
    for sub in ("rgb", "depth", "cam"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    for i, pose in enumerate(poses):
        rgb, depth = render(mesh, intr, pose)
        save_rgb_png(rgb, out / "rgb" / f"{i:02d}.png")
        save_depth_png(depth, out / "depth" / f"{i:02d}.png")
        save_camera_json(intr, pose, out / "cam" / f"{i:02d}.json")
    print(f"rendered {len(poses)} views to {out}")
    return 0


def _cmd_backproject(args) -> int:
    if len(args.depth) != len(args.camera):
        print("--depth and --camera counts must match", file=sys.stderr)
        return 2
    views = []
    for depth_path, cam_path in zip(args.depth, args.camera):
        intr, pose = load_camera_json(cam_path)
        views.append(ViewBundle(load_depth_png(depth_path), intr, pose))
    if args.points:
        cloud = combine_views(views, args.points, args.seed)
    else:
        import numpy as np

        from .geometry import PointCloud
        cloud = PointCloud(np.concatenate([backproject(v).points for v in views], axis=0))
    save_point_cloud(cloud, args.out)
    print(f"wrote {len(cloud)} points to {args.out}")
    return 0


def _cmd_caption(args) -> int:
    mesh = load_mesh(args.mesh)
    mesh, _ = normalize_to_unit_cube(mesh)
    providers = _provider_config(args)
    views = render_segment_views(mesh, args.views, args.seed)
    caption = caption_segment(providers, views, bounds=mesh.aabb())
    if args.out:
        Path(args.out).write_text(caption.text + "\n", encoding="utf-8")
    print(caption.text)
    return 0


def _collect_inputs(path) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(q for q in p.iterdir() if q.suffix.lower() in (".obj", ".ply"))
    return [p]


def _gen_params(args) -> GenerationParams:
    return GenerationParams(
        views=args.views, n_points=args.points, split_ratio=args.split,
        seed=args.seed, meshes_only=getattr(args, "meshes_only", False),
        workers=args.workers,
    )


def _cmd_build(args) -> int:
    inputs = _collect_inputs(args.input)
    if not inputs:
        print(f"no input meshes under {args.input}", file=sys.stderr)
        return 1
    manifest = build_dataset(inputs, args.out, _gen_params(args), _provider_config(args))
    print(f"built {len(manifest.models)} models ({len(manifest.failures)} failures) in {args.out}")
    return 1 if manifest.failures else 0


def _cmd_import(args) -> int:
    manifest = import_external(args.models_dir, args.out, _gen_params(args), _provider_config(args))
    print(f"imported {len(manifest.models)} models ({len(manifest.failures)} failures) in {args.out}")
    return 1 if manifest.failures else 0


def _cmd_evaluate(args) -> int:
    config = MetricsConfig(tau=args.tau, auc_samples=args.auc_samples,
                           l2_convention=args.l2_convention)
    if args.pairs:
        result = evaluate_batch(read_pairs_file(args.pairs), config,
                                json_out=args.json_out, csv_out=args.csv_out)
        payload = result if args.json else result["aggregate"]
    else:
        if not (args.pred and args.gt):
            print("need --pred and --gt (or --pairs)", file=sys.stderr)
            return 2
        from .meshio import load_point_cloud
        report = evaluate(load_point_cloud(args.pred), load_point_cloud(args.gt), config)
        payload = report.to_dict()
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")
    return 0


def _cmd_validate(args) -> int:
    report = validate_dataset(args.manifest)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        for c in report.checks:
            line = f"[{'PASS' if c.ok else 'FAIL'}] {c.name}"
            if c.detail:
                line += f" ({c.detail})"
            print(line)
        print("dataset valid" if report.passed else "dataset INVALID")
    return 0 if report.passed else 1


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.scenes, host=args.host, port=args.port,
          providers=_provider_config(args), static_dir=args.static,
          bev_resolution=args.bev_resolution, bev_margin=args.bev_margin)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sceneforge",
                                     description="3D scene to multi-modal completion-dataset toolchain")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, providers=True, seed=True):
        if providers:
            p.add_argument("--providers", help="provider config JSON")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("segment", help="auto-segment scene meshes into object sub-meshes")
    p.add_argument("scenes", help="scene mesh file or directory")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=32, help="auto-prompt lattice size")
    add_common(p)
    p.set_defaults(fn=_cmd_segment)

    p = sub.add_parser("render", help="render RGB/depth views of a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--mode", choices=("random", "trajectory"), default="random")
    p.add_argument("--views", type=int, default=15)
    p.add_argument("--traj", help="CSV with header x,y,z,pitch,yaw (degrees)")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=224)
    p.add_argument("--height", type=int, default=224)
    p.add_argument("--normalize", action="store_true", help="normalize mesh first")
    add_common(p, providers=False)
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("backproject", help="depth images -> point cloud")
    p.add_argument("--depth", action="append", required=True)
    p.add_argument("--camera", action="append", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int, help="resample to this many points")
    add_common(p, providers=False)
    p.set_defaults(fn=_cmd_backproject)

    p = sub.add_parser("caption", help="caption a model from rendered views")
    p.add_argument("--mesh", required=True)
    p.add_argument("--views", type=int, default=4)
    p.add_argument("--out")
    add_common(p)
    p.set_defaults(fn=_cmd_caption)

    p = sub.add_parser("build", help="build a multi-modal dataset from meshes")
    p.add_argument("--input", required=True, help="mesh file or directory")
    p.add_argument("--out", required=True)
    p.add_argument("--views", type=int, default=15)
    p.add_argument("--points", type=int, default=2048)
    p.add_argument("--split", type=float, default=0.7)
    p.add_argument("--meshes-only", action="store_true")
    p.add_argument("--workers", type=int, default=4)
    add_common(p)
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("import", help="import an external mesh dataset (no segmentation)")
    p.add_argument("--models-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--views", type=int, default=15)
    p.add_argument("--points", type=int, default=2048)
    p.add_argument("--split", type=float, default=0.7)
    p.add_argument("--workers", type=int, default=4)
    add_common(p)
    p.set_defaults(fn=_cmd_import)

    p = sub.add_parser("evaluate", help="completion metrics for cloud pairs")
    p.add_argument("--pred")
    p.add_argument("--gt")
    p.add_argument("--pairs", help="CSV/JSON pairing file {pred_path, gt_path, model_id}")
    p.add_argument("--tau", type=float, default=0.001)
    p.add_argument("--auc-samples", type=int, default=64)
    p.add_argument("--l2-convention", choices=("literal-norm", "squared"), default="literal-norm")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--json-out", help="write full batch report JSON here")
    p.add_argument("--csv-out", help="write batch summary CSV here")
    add_common(p, providers=False, seed=False)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("validate", help="validate a built dataset against its manifest")
    p.add_argument("manifest")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("serve", help="run the segmentation HTTP service")
    p.add_argument("--scenes", required=True, help="scene storage directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static", help="directory with the web UI to serve at /")
    p.add_argument("--bev-resolution", type=int, default=512)
    p.add_argument("--bev-margin", type=float, default=0.05)
    add_common(p, seed=False)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SceneForgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: not found: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
