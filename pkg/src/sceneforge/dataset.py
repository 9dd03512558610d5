"""Dataset materialization: run the full pipeline over input models and lay
out a multi-modal dataset on disk with a manifest and train/test split.

Per-model layout under out_dir/{model_id}/:
    mesh.ply  gt.ply  caption.txt
    rgb/NN.png  depth/NN.png  cam/NN.json  partial/NN.ply (+ NN.json sidecar)

The manifest is written last, atomically, so an interrupted build never
leaves a manifest referencing missing files. Per-model seeds derive from a
stable hash of (master seed, model id): adding models never reshuffles the
randomness of existing ones.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .camera import default_intrinsics, random_viewpoints
from .errors import DatasetError
from .geometry import TriangleMesh, normalize_to_unit_cube, sample_surface
from .imageio import load_camera_json, load_depth_png, save_camera_json, save_depth_png, save_rgb_png
from .meshio import load_mesh, load_point_cloud, save_mesh, save_point_cloud
from .partial import ViewBundle, combine_partial_sets
from .providers import ProviderConfig, caption_segment
from .raster import render
from .segmentation import SegmentRecord
from .util import stable_seed, write_json_atomic

MANIFEST_VERSION = "1"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class GenerationParams:
    views: int = 15
    n_points: int = 2048
    split_ratio: float = 0.7
    seed: int = 0
    meshes_only: bool = False
    caption_views: int = 4
    workers: int = 4


@dataclass
class ModelEntry:
    id: str
    mesh_path: str
    gt_path: str = ""
    caption_path: str = ""
    rgb_paths: list[str] = field(default_factory=list)
    depth_paths: list[str] = field(default_factory=list)
    camera_paths: list[str] = field(default_factory=list)
    partial_paths: list[str] = field(default_factory=list)
    split: str = "train"
    provenance: str = "segmented"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class DatasetManifest:
    version: str
    models: list[ModelEntry]
    generation_params: dict
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "generation_params": self.generation_params,
            "models": [m.to_dict() for m in self.models],
            "failures": self.failures,
        }

    @staticmethod
    def from_dict(data: dict) -> "DatasetManifest":
        return DatasetManifest(
            version=data["version"],
            models=[ModelEntry(**m) for m in data["models"]],
            generation_params=data["generation_params"],
            failures=data.get("failures", []),
        )

    @staticmethod
    def load(path) -> "DatasetManifest":
        try:
            return DatasetManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise DatasetError(f"unreadable manifest {path}: {e}") from e


def _coerce_inputs(inputs):
    """Normalize paths / SegmentRecords to (id, mesh-thunk) pairs.

    Loading is deferred into the thunk so a corrupt file fails only its own
    model, not the whole build.
    """
    out = []
    seen = set()
    for item in inputs:
        if isinstance(item, SegmentRecord):
            model_id, thunk = item.id, (lambda rec=item: rec.submesh)
        else:
            path = Path(item)
            model_id, thunk = path.stem, (lambda p=path: load_mesh(p))
        if model_id in seen:
            raise DatasetError(f"duplicate model id '{model_id}'")
        seen.add(model_id)
        out.append((model_id, thunk))
    return out


def assign_split(model_ids: list[str], split_ratio: float, master_seed: int) -> dict[str, str]:
    """Seeded split over the sorted id set; independent of build order.

    Train count = round(ratio * N), at least 1 when N >= 1.
    """
    import numpy as np

    ids = sorted(model_ids)
    n = len(ids)
    if n == 0:
        return {}
    train_count = min(n, max(1, int(math.floor(split_ratio * n + 0.5))))
    rng = np.random.default_rng(stable_seed(master_seed, "split"))
    perm = rng.permutation(n)
    split = {}
    for rank, idx in enumerate(perm):
        split[ids[idx]] = "train" if rank < train_count else "test"
    return split


def _build_one_model(
    model_id: str,
    mesh: TriangleMesh,
    provenance: str,
    out_dir: Path,
    params: GenerationParams,
    providers: ProviderConfig,
) -> ModelEntry:
    model_dir = out_dir / model_id
    model_dir.mkdir(parents=True, exist_ok=True)
    model_seed = stable_seed(params.seed, model_id)

    normalized, _ = normalize_to_unit_cube(mesh)
    mesh_rel = f"{model_id}/mesh.ply"
    save_mesh(normalized, out_dir / mesh_rel)
    entry = ModelEntry(id=model_id, mesh_path=mesh_rel, provenance=provenance)
    if params.meshes_only:
        return entry

    gt = sample_surface(normalized, params.n_points, seed=stable_seed(model_seed, "gt"))
    entry.gt_path = f"{model_id}/gt.ply"
    save_point_cloud(gt, out_dir / entry.gt_path)

    for sub in ("rgb", "depth", "cam", "partial"):
        (model_dir / sub).mkdir(exist_ok=True)
    intr = default_intrinsics()
    poses = random_viewpoints(normalized.aabb(), params.views, seed=stable_seed(model_seed, "views"))
    bundles = []
    rgb_views = []
    for i, pose in enumerate(poses):
        rgb, depth = render(normalized, intr, pose)
        rgb_views.append(rgb)
        bundles.append(ViewBundle(depth, intr, pose))
        rgb_rel = f"{model_id}/rgb/{i:02d}.png"
        depth_rel = f"{model_id}/depth/{i:02d}.png"
        cam_rel = f"{model_id}/cam/{i:02d}.json"
        save_rgb_png(rgb, out_dir / rgb_rel)
        save_depth_png(depth, out_dir / depth_rel)
        save_camera_json(intr, pose, out_dir / cam_rel)
        entry.rgb_paths.append(rgb_rel)
        entry.depth_paths.append(depth_rel)
        entry.camera_paths.append(cam_rel)

    partials = combine_partial_sets(bundles, n_sets=params.views, n_points=params.n_points,
                                    seed=stable_seed(model_seed, "partials"))
    for i, part in enumerate(partials):
        rel = f"{model_id}/partial/{i:02d}.ply"
        save_point_cloud(part.cloud, out_dir / rel)
        write_json_atomic(out_dir / f"{model_id}/partial/{i:02d}.json",
                          {"view_indices": list(part.view_indices), "seed": part.seed})
        entry.partial_paths.append(rel)

    caption = caption_segment(providers, rgb_views[:params.caption_views], bounds=normalized.aabb())
    entry.caption_path = f"{model_id}/caption.txt"
    (out_dir / entry.caption_path).write_text(caption.text + "\n", encoding="utf-8")
    return entry


def build_dataset(
    inputs,
    out_dir,
    params: GenerationParams | None = None,
    providers: ProviderConfig | None = None,
    provenance: str | None = None,
) -> DatasetManifest:
    """Run the pipeline over input models and write the dataset under out_dir.

    Per-model failures are isolated into the manifest's failures section;
    only a manifest write failure aborts.
    """
    params = params or GenerationParams()
    providers = providers or ProviderConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pairs = _coerce_inputs(inputs)
    if not pairs:
        raise DatasetError("no input models")
    prov = provenance or "segmented"

    entries: dict[str, ModelEntry] = {}
    failures = []

    def run(pair):
        model_id, thunk = pair
        return _build_one_model(model_id, thunk(), prov, out_dir, params, providers)

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            futures = {pool.submit(run, p): p[0] for p in pairs}
            for future, model_id in futures.items():
                try:
                    entries[model_id] = future.result()
                except Exception as e:  # isolate per-model failures
                    failures.append({"id": model_id, "error": str(e)})
    else:
        for p in pairs:
            try:
                entries[p[0]] = run(p)
            except Exception as e:
                failures.append({"id": p[0], "error": str(e)})

    split = assign_split(list(entries), params.split_ratio, params.seed)
    models = []
    for model_id in sorted(entries):
        entries[model_id].split = split[model_id]
        models.append(entries[model_id])

    manifest = DatasetManifest(
        version=MANIFEST_VERSION,
        models=models,
        generation_params={
            "n_points": params.n_points,
            "views": 0 if params.meshes_only else params.views,
            "seed": params.seed,
            "split_ratio": params.split_ratio,
            "meshes_only": params.meshes_only,
        },
        failures=sorted(failures, key=lambda f: f["id"]),
    )
    write_json_atomic(out_dir / MANIFEST_NAME, manifest.to_dict())
    return manifest


def import_external(models_dir, out_dir, params: GenerationParams | None = None,
                    providers: ProviderConfig | None = None) -> DatasetManifest:
    """Build from an existing directory of object-level meshes (no segmentation)."""
    models_dir = Path(models_dir)
    if not models_dir.is_dir():
        raise DatasetError(f"not a directory: {models_dir}")
    paths = sorted(p for p in models_dir.iterdir() if p.suffix.lower() in (".obj", ".ply"))
    if not paths:
        raise DatasetError(f"no mesh files in {models_dir}")
    return build_dataset(paths, out_dir, params, providers, provenance="imported")


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks]}


def validate_dataset(manifest_path) -> ValidationReport:
    """Check every manifest invariant plus artifact contents on disk."""
    manifest_path = Path(manifest_path)
    manifest = DatasetManifest.load(manifest_path)
    root = manifest_path.parent
    gp = manifest.generation_params
    views = gp["views"]
    n_points = gp["n_points"]
    checks: list[CheckResult] = []

    def check(name: str, ok: bool, detail: str = ""):
        checks.append(CheckResult(name, bool(ok), detail if not ok else ""))

    n = len(manifest.models)
    train = sum(1 for m in manifest.models if m.split == "train")
    if n > 0 and not gp.get("meshes_only"):
        expected = max(1, int(math.floor(gp["split_ratio"] * n + 0.5)))
        check("split-ratio", abs(train - expected) <= 1, f"train={train}, expected~{expected}")

    for m in manifest.models:
        prefix = f"{m.id}:"
        for kind, paths in (("rgb", m.rgb_paths), ("depth", m.depth_paths),
                            ("camera", m.camera_paths), ("partial", m.partial_paths)):
            check(f"{prefix}{kind}-count", len(paths) == views,
                  f"{len(paths)} != views={views}")
        all_paths = [m.mesh_path, *m.rgb_paths, *m.depth_paths, *m.camera_paths, *m.partial_paths]
        if not gp.get("meshes_only"):
            all_paths += [m.gt_path, m.caption_path]
        missing = [p for p in all_paths if p and not (root / p).exists()]
        check(f"{prefix}paths-exist", not missing, f"missing: {missing[:3]}")
        if missing or gp.get("meshes_only"):
            continue
        try:
            gt = load_point_cloud(root / m.gt_path)
            check(f"{prefix}gt-count", len(gt) == n_points, f"{len(gt)} != {n_points}")
        except Exception as e:
            check(f"{prefix}gt-count", False, str(e))
        for rel in m.partial_paths:
            try:
                cloud = load_point_cloud(root / rel)
                if len(cloud) != n_points:
                    check(f"{prefix}partial-count", False, f"{rel}: {len(cloud)} != {n_points}")
                    break
            except Exception as e:
                check(f"{prefix}partial-count", False, f"{rel}: {e}")
                break
        else:
            check(f"{prefix}partial-count", True)
        for depth_rel, cam_rel in zip(m.depth_paths, m.camera_paths):
            try:
                depth = load_depth_png(root / depth_rel)
                intr, _ = load_camera_json(root / cam_rel)
                if (depth.height, depth.width) != (intr.height, intr.width):
                    check(f"{prefix}depth-dims", False, f"{depth_rel} vs {cam_rel}")
                    break
            except Exception as e:
                check(f"{prefix}depth-dims", False, f"{depth_rel}: {e}")
                break
        else:
            check(f"{prefix}depth-dims", True)

    return ValidationReport(tuple(checks))
