"""HTTP service for the interactive segmentation workflow.

Scene state lives in memory; review decisions are journaled per scene
(JSONL write-ahead) so a restart can reconstruct them after re-slicing.
Long operations (slice, export) run as async jobs polled via /api/jobs;
mask requests are synchronous, bounded by the provider timeout.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response, UploadFile
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel

from .camera import default_intrinsics, random_viewpoints
from .errors import EmptyRegionError, MeshParseError, SceneForgeError
from .geometry import TriangleMesh
from .imageio import DEPTH_SCALE
from .meshio import load_mesh, save_mesh
from .providers import (
    LabelMask,
    PromptBox,
    PromptPoint,
    PromptSet,
    ProviderConfig,
    encode_mask_b64,
    request_mask,
)
from .raster import BevFrame, DepthImage, RgbImage, render, render_bev
from .segmentation import ACCEPTED, PENDING, REJECTED, SegmentRecord, slice_by_mask
from .util import stable_seed

DECISION_MAP = {"accept": ACCEPTED, "reject": REJECTED}


@dataclass
class Job:
    id: str
    kind: str  # mask | slice | score | build
    state: str = "queued"  # queued -> running -> succeeded | failed
    result: dict | None = None
    error: str | None = None


@dataclass
class SceneEntry:
    id: str
    name: str
    mesh: TriangleMesh
    directory: Path
    bev_resolution: int = 512
    bev_margin: float = 0.05
    status: str = "loaded"  # loaded | segmenting | done
    bev: tuple[RgbImage, DepthImage, BevFrame] | None = None
    masks: dict[str, LabelMask] = field(default_factory=dict)
    segments: dict[str, SegmentRecord] = field(default_factory=dict)
    decisions: dict[str, str] = field(default_factory=dict)  # journaled reviews
    lock: threading.Lock = field(default_factory=threading.Lock)

    def bev_cached(self):
        if self.bev is None:
            self.bev = render_bev(self.mesh, self.bev_resolution, self.bev_margin)
        return self.bev

    @property
    def journal_path(self) -> Path:
        return self.directory / "journal.jsonl"

    def journal_decision(self, segment_id: str, decision: str) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as f:
            f.write(json.dumps({"segment_id": segment_id, "decision": decision}) + "\n")
        self.decisions[segment_id] = decision

    def replay_journal(self) -> None:
        if not self.journal_path.exists():
            return
        for line in self.journal_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            self.decisions[entry["segment_id"]] = entry["decision"]


class PointBody(BaseModel):
    u: int
    v: int
    polarity: str = "foreground"


class BoxBody(BaseModel):
    u_min: int
    v_min: int
    u_max: int
    v_max: int


class PromptsBody(BaseModel):
    points: list[PointBody] = []
    boxes: list[BoxBody] = []
    request_id: str | None = None


class SliceBody(BaseModel):
    mask_id: str
    request_id: str | None = None


class ReviewBody(BaseModel):
    decision: str


class ExportBody(BaseModel):
    accepted_only: bool = False
    request_id: str | None = None


def _png_response(arr: np.ndarray) -> Response:
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def create_app(scene_dir, providers: ProviderConfig | None = None,
               workers: int = 2, static_dir=None,
               bev_resolution: int = 512, bev_margin: float = 0.05) -> FastAPI:
    scene_dir = Path(scene_dir)
    scene_dir.mkdir(parents=True, exist_ok=True)
    providers = providers or ProviderConfig()

    app = FastAPI(title="sceneforge segmentation service")
    scenes: dict[str, SceneEntry] = {}
    jobs: dict[str, Job] = {}
    request_cache: dict[str, dict] = {}
    executor = ThreadPoolExecutor(max_workers=workers)
    state_lock = threading.Lock()

    def make_scene(scene_id: str, name: str, mesh: TriangleMesh, directory: Path) -> SceneEntry:
        return SceneEntry(id=scene_id, name=name, mesh=mesh, directory=directory,
                          bev_resolution=bev_resolution, bev_margin=bev_margin)

    def load_existing():
        for sub in sorted(scene_dir.iterdir()) if scene_dir.exists() else []:
            mesh_path = sub / "mesh.ply"
            if sub.is_dir() and mesh_path.exists():
                try:
                    entry = make_scene(sub.name, sub.name, load_mesh(mesh_path), sub)
                except (MeshParseError, SceneForgeError):
                    continue
                entry.replay_journal()
                scenes[entry.id] = entry

    load_existing()

    def get_scene(scene_id: str) -> SceneEntry:
        scene = scenes.get(scene_id)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"unknown scene '{scene_id}'")
        return scene

    def submit_job(kind: str, fn) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], kind=kind)
        jobs[job.id] = job

        def run():
            job.state = "running"
            try:
                job.result = fn()
                job.state = "succeeded"
            except Exception as e:
                job.error = str(e)
                job.state = "failed"

        executor.submit(run)
        return job

    @app.get("/api/scenes")
    def list_scenes():
        return [{"id": s.id, "name": s.name, "status": s.status} for s in scenes.values()]

    @app.post("/api/scenes")
    async def upload_scene(file: UploadFile):
        suffix = Path(file.filename or "mesh.ply").suffix.lower()
        if suffix not in (".ply", ".obj"):
            raise HTTPException(status_code=422, detail="mesh must be .ply or .obj")
        scene_id = uuid.uuid4().hex[:8]
        directory = scene_dir / scene_id
        directory.mkdir(parents=True)
        raw_path = directory / f"upload{suffix}"
        raw_path.write_bytes(await file.read())
        try:
            mesh = load_mesh(raw_path)
        except (MeshParseError, SceneForgeError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        save_mesh(mesh, directory / "mesh.ply")
        entry = make_scene(scene_id, Path(file.filename or scene_id).stem, mesh, directory)
        with state_lock:
            scenes[scene_id] = entry
        return {"id": scene_id}

    @app.get("/api/scenes/{scene_id}/bev")
    def get_bev(scene_id: str, kind: str = "rgb"):
        scene = get_scene(scene_id)
        rgb, height, _ = scene.bev_cached()
        if kind == "rgb":
            return _png_response(rgb.pixels)
        if kind == "height":
            mm = np.clip(np.round(np.clip(height.values, 0.0, None) * DEPTH_SCALE), 0, 65535)
            return _png_response(mm.astype(np.uint16))
        raise HTTPException(status_code=422, detail="kind must be rgb or height")

    @app.post("/api/scenes/{scene_id}/prompts")
    def post_prompts(scene_id: str, body: PromptsBody):
        scene = get_scene(scene_id)
        if body.request_id and body.request_id in request_cache:
            return request_cache[body.request_id]
        rgb, height, _ = scene.bev_cached()
        try:
            prompts = PromptSet(
                points=tuple(PromptPoint(p.u, p.v, p.polarity) for p in body.points),
                boxes=tuple(PromptBox(b.u_min, b.v_min, b.u_max, b.v_max) for b in body.boxes),
            )
            prompts.validate_bounds(rgb.width, rgb.height)
        except ValueError as e:
            raise HTTPException(status_code=422, detail=[{"loc": ["body", "points"], "msg": str(e)}])
        with scene.lock:
            try:
                mask = request_mask(providers, rgb, prompts, height_image=height)
            except EmptyRegionError as e:
                raise HTTPException(status_code=422, detail=[{"loc": ["body"], "msg": str(e)}])
            mask_id = uuid.uuid4().hex[:12]
            scene.masks[mask_id] = mask
        response = {"mask_id": mask_id, "mask": encode_mask_b64(mask)}
        if body.request_id:
            request_cache[body.request_id] = response
        return response

    @app.post("/api/scenes/{scene_id}/slice")
    def post_slice(scene_id: str, body: SliceBody):
        scene = get_scene(scene_id)
        if body.request_id and body.request_id in request_cache:
            return request_cache[body.request_id]
        mask = scene.masks.get(body.mask_id)
        if mask is None:
            raise HTTPException(status_code=404, detail=f"unknown mask '{body.mask_id}'")

        def run():
            with scene.lock:
                scene.status = "segmenting"
                _, _, frame = scene.bev_cached()
                records, report = slice_by_mask(scene.mesh, mask, frame)
                scene.segments = {}
                for rec in records:
                    rec.id = f"{scene.id}/{rec.id}"
                    decided = scene.decisions.get(rec.id)
                    if decided in (ACCEPTED, REJECTED):
                        rec.status = decided
                    scene.segments[rec.id] = rec
                scene.status = "done"
                return {
                    "segment_ids": sorted(scene.segments),
                    "unassigned": report.unassigned,
                    "boundary_split": report.boundary_split,
                }

        job = submit_job("slice", run)
        response = {"job_id": job.id}
        if body.request_id:
            request_cache[body.request_id] = response
        return response

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job '{job_id}'")
        return {"state": job.state, "result": job.result, "error": job.error}

    def find_segment(segment_id: str) -> tuple[SceneEntry, SegmentRecord]:
        scene_id = segment_id.split("/", 1)[0]
        scene = scenes.get(scene_id)
        if scene is None or segment_id not in scene.segments:
            raise HTTPException(status_code=404, detail=f"unknown segment '{segment_id}'")
        return scene, scene.segments[segment_id]

    @app.get("/api/scenes/{scene_id}/segments")
    def list_segments(scene_id: str):
        scene = get_scene(scene_id)
        out = []
        for seg_id in sorted(scene.segments):
            rec = scene.segments[seg_id]
            out.append({
                "id": rec.id,
                "label": rec.label,
                "triangle_count": rec.submesh.n_triangles,
                "relevance": rec.relevance.score if rec.relevance else None,
                "status": rec.status,
                "provenance": rec.provenance,
                "preview_url": f"/api/segments/{rec.id}/preview",
            })
        return out

    @app.get("/api/segments/{segment_id:path}/preview")
    def segment_preview(segment_id: str):
        _, rec = find_segment(segment_id)
        pose = random_viewpoints(rec.submesh.aabb(), 1, seed=stable_seed("preview", rec.id))[0]
        rgb, _ = render(rec.submesh, default_intrinsics(), pose)
        return _png_response(rgb.pixels)

    @app.post("/api/segments/{segment_id:path}/review")
    def review_segment(segment_id: str, body: ReviewBody):
        scene, rec = find_segment(segment_id)
        decision = DECISION_MAP.get(body.decision, body.decision)
        if decision not in (ACCEPTED, REJECTED):
            raise HTTPException(status_code=422, detail="decision must be accept or reject")
        with scene.lock:
            if rec.status == decision:
                return {"status": rec.status}  # idempotent repeat
            if rec.status != PENDING:
                raise HTTPException(status_code=409,
                                    detail=f"segment already {rec.status}")
            rec.decide(decision)
            scene.journal_decision(rec.id, decision)
        return {"status": rec.status}

    @app.post("/api/scenes/{scene_id}/export")
    def export_scene(scene_id: str, body: ExportBody):
        scene = get_scene(scene_id)
        if body.request_id and body.request_id in request_cache:
            return request_cache[body.request_id]

        def run():
            with scene.lock:
                export_dir = scene.directory / "export"
                export_dir.mkdir(exist_ok=True)
                manifest = []
                files = []
                for seg_id in sorted(scene.segments):
                    rec = scene.segments[seg_id]
                    if body.accepted_only and rec.status != ACCEPTED:
                        continue
                    fname = seg_id.split("/", 1)[1] + ".ply"
                    save_mesh(rec.submesh, export_dir / fname)
                    files.append(fname)
                    manifest.append({
                        "id": rec.id,
                        "label": rec.label,
                        "triangle_count": rec.submesh.n_triangles,
                        "relevance": rec.relevance.score if rec.relevance else None,
                        "status": rec.status,
                        "provenance": rec.provenance,
                    })
                (export_dir / "segments.json").write_text(
                    json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
                return {"dir": str(export_dir), "files": files}

        job = submit_job("build", run)
        response = {"job_id": job.id}
        if body.request_id:
            request_cache[body.request_id] = response
        return response

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(scene_dir, host: str = "127.0.0.1", port: int = 8080,
          providers: ProviderConfig | None = None, static_dir=None,
          bev_resolution: int = 512, bev_margin: float = 0.05) -> None:
    import uvicorn

    app = create_app(scene_dir, providers=providers, static_dir=static_dir,
                     bev_resolution=bev_resolution, bev_margin=bev_margin)
    uvicorn.run(app, host=host, port=port, log_level="warning")
