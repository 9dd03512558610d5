"""Clients for external model services (mask, relevance, caption) plus
deterministic built-in fallbacks, so the whole pipeline runs offline.

Wire protocol (JSON over HTTP):
  POST /v1/mask    {image: b64 PNG, points: [{u, v, polarity}], boxes: [...]}
                   -> {mask: b64 16-bit PNG}
  POST /v1/score   {images: [b64 PNG], labels: [str]} -> {scores: [[float]]}
  POST /v1/caption {image: b64 PNG} -> {caption: str}

Timeouts are retried (3 attempts, exponential backoff); malformed responses
are not. In-flight requests per endpoint are bounded.
"""

from __future__ import annotations

import base64
import io
import json
import os
import threading
import time
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import requests
from PIL import Image

from .errors import EmptyRegionError, ProviderProtocolError, ProviderTimeout
from .geometry import Aabb, _as_readonly
from .raster import DepthImage, RgbImage

FOREGROUND = "foreground"
BACKGROUND = "background"


@dataclass(frozen=True)
class PromptPoint:
    u: int
    v: int
    polarity: str = FOREGROUND

    def __post_init__(self):
        if self.polarity not in (FOREGROUND, BACKGROUND):
            raise ValueError(f"bad polarity '{self.polarity}'")


@dataclass(frozen=True)
class PromptBox:
    u_min: int
    v_min: int
    u_max: int
    v_max: int

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("box must satisfy u_min < u_max and v_min < v_max")


@dataclass(frozen=True)
class PromptSet:
    points: tuple[PromptPoint, ...] = ()
    boxes: tuple[PromptBox, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if not self.points and not self.boxes:
            raise ValueError("prompt set needs at least one point or box")

    def validate_bounds(self, width: int, height: int) -> None:
        for p in self.points:
            if not (0 <= p.u < width and 0 <= p.v < height):
                raise ValueError(f"prompt point ({p.u}, {p.v}) outside {width}x{height} image")
        for b in self.boxes:
            if not (0 <= b.u_min and b.u_max <= width and 0 <= b.v_min and b.v_max <= height):
                raise ValueError(f"prompt box {b} outside {width}x{height} image")


@dataclass(frozen=True)
class LabelMask:
    """Per-pixel uint16 labels, 0 = background; labels form {0..K}."""

    labels: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.labels, dtype=np.uint16)
        if m.ndim != 2:
            raise ValueError("labels must be (H, W)")
        present = np.unique(m)
        top = int(present.max(initial=0))
        if top > 0 and len(np.setdiff1d(np.arange(1, top + 1), present)) > 0:
            raise ValueError("label values must be contiguous {0..K}")
        object.__setattr__(self, "labels", _as_readonly(m))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def n_labels(self) -> int:
        return int(self.labels.max(initial=0))


@dataclass(frozen=True)
class RelevanceScore:
    score: float
    label: str
    segment_id: str = ""
    provenance: str = "scored"  # or "unscored" when no scorer ran

    def __post_init__(self):
        if not (np.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError("score must be finite in [0, 1]")


@dataclass(frozen=True)
class Caption:
    text: str
    source_view_count: int

    def __post_init__(self):
        if not self.text:
            raise ValueError("caption text must be non-empty")


@dataclass(frozen=True)
class ProviderConfig:
    """Endpoint URLs (None = not configured) and client behavior knobs."""

    mask_url: str | None = None
    score_url: str | None = None
    caption_url: str | None = None
    timeout_ms: int = 10000
    max_inflight: int = 4
    fallback_enabled: bool = True
    retries: int = 3
    backoff_s: float = 0.5
    # fallback mask tuning
    height_epsilon_fraction: float = 0.05
    ground_percentile: float = 5.0
    dedupe_iou: float = 0.8

    @staticmethod
    def from_file(path) -> "ProviderConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return ProviderConfig(**data).with_env_overrides()

    def with_env_overrides(self) -> "ProviderConfig":
        env = os.environ
        kwargs = {}
        for key, name in [("mask_url", "SCENEFORGE_MASK_URL"),
                          ("score_url", "SCENEFORGE_SCORE_URL"),
                          ("caption_url", "SCENEFORGE_CAPTION_URL")]:
            if env.get(name):
                kwargs[key] = env[name]
        if env.get("SCENEFORGE_PROVIDER_TIMEOUT_MS"):
            kwargs["timeout_ms"] = int(env["SCENEFORGE_PROVIDER_TIMEOUT_MS"])
        if env.get("SCENEFORGE_FALLBACK_ENABLED"):
            kwargs["fallback_enabled"] = env["SCENEFORGE_FALLBACK_ENABLED"].lower() in ("1", "true", "yes")
        return replace(self, **kwargs) if kwargs else self


_inflight_locks: dict[str, threading.BoundedSemaphore] = {}
_inflight_guard = threading.Lock()


def _inflight(url: str, limit: int) -> threading.BoundedSemaphore:
    with _inflight_guard:
        if url not in _inflight_locks:
            _inflight_locks[url] = threading.BoundedSemaphore(limit)
        return _inflight_locks[url]


def _post_json(config: ProviderConfig, url: str, payload: dict) -> dict:
    timeout = config.timeout_ms / 1000.0
    last_exc = None
    for attempt in range(config.retries):
        if attempt > 0:
            time.sleep(config.backoff_s * (2 ** (attempt - 1)))
        try:
            with _inflight(url, config.max_inflight):
                resp = requests.post(url, json=payload, timeout=timeout)
        except (requests.Timeout, requests.ConnectionError) as e:
            last_exc = e
            continue
        if resp.status_code != 200:
            raise ProviderProtocolError(f"{url} returned HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as e:
            raise ProviderProtocolError(f"{url} returned non-JSON body") from e
    raise ProviderTimeout(f"{url} timed out after {config.retries} attempts") from last_exc


def encode_image_b64(image: RgbImage) -> str:
    buf = io.BytesIO()
    Image.fromarray(image.pixels).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_mask_b64(data: str) -> LabelMask:
    try:
        raw = base64.b64decode(data)
        with Image.open(io.BytesIO(raw)) as im:
            arr = np.asarray(im)
    except Exception as e:
        raise ProviderProtocolError("mask is not a decodable PNG") from e
    return LabelMask(arr.astype(np.uint16))


def encode_mask_b64(mask: LabelMask) -> str:
    buf = io.BytesIO()
    Image.fromarray(mask.labels.astype(np.uint16)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def request_mask(
    config: ProviderConfig,
    image: RgbImage,
    prompts: PromptSet,
    height_image: DepthImage | None = None,
) -> LabelMask:
    """Mask from the configured provider, or the height-based fallback."""
    prompts.validate_bounds(image.width, image.height)
    if config.mask_url:
        payload = {
            "image": encode_image_b64(image),
            "points": [{"u": p.u, "v": p.v, "polarity": p.polarity} for p in prompts.points],
            "boxes": [{"u_min": b.u_min, "v_min": b.v_min, "u_max": b.u_max, "v_max": b.v_max}
                      for b in prompts.boxes],
        }
        data = _post_json(config, config.mask_url, payload)
        if "mask" not in data:
            raise ProviderProtocolError("mask response lacks 'mask' field")
        mask = decode_mask_b64(data["mask"])
        if (mask.height, mask.width) != (image.height, image.width):
            raise ProviderProtocolError("mask dimensions do not match the image")
        return mask
    if config.fallback_enabled and height_image is not None:
        return fallback_mask(height_image, prompts, config)
    raise ProviderProtocolError("no mask provider configured and fallback unavailable")


def fallback_mask(
    height_image: DepthImage,
    prompts: PromptSet,
    config: ProviderConfig | None = None,
) -> LabelMask:
    """Deterministic mask from BEV heights, no model involved.

    Each foreground point grows a 4-connected region over above-ground
    pixels whose height stays within epsilon of the running region mean;
    each box selects all above-ground pixels inside it; background points
    carve their grown region out of every label. Regions overlapping an
    earlier, larger one by IoU >= dedupe_iou are dropped as duplicates
    (dense prompt grids would otherwise label every building many times).
    """
    config = config or ProviderConfig()
    prompts.validate_bounds(height_image.width, height_image.height)
    h = height_image.values
    above, height_range = above_ground_mask(height_image, config)
    eps = config.height_epsilon_fraction * height_range if height_range > 0 else np.inf

    regions = []
    for p in prompts.points:
        if p.polarity != FOREGROUND:
            continue
        if not above[p.v, p.u]:
            raise EmptyRegionError(f"point prompt ({p.u}, {p.v}) lands on background")
        regions.append(_region_grow(h, above, p.u, p.v, eps))
    for b in prompts.boxes:
        sel = np.zeros_like(above)
        sel[b.v_min:b.v_max, b.u_min:b.u_max] = above[b.v_min:b.v_max, b.u_min:b.u_max]
        if not sel.any():
            raise EmptyRegionError(f"box prompt {b} selects no above-ground pixels")
        regions.append(sel)

    kept = _dedupe_regions(regions, config.dedupe_iou)

    carve = np.zeros_like(above)
    for p in prompts.points:
        if p.polarity != BACKGROUND:
            continue
        if above[p.v, p.u]:
            carve |= _region_grow(h, above, p.u, p.v, eps)

    labels = np.zeros(h.shape, dtype=np.uint16)
    next_label = 1
    for region in kept:
        region = region & ~carve & (labels == 0)
        if not region.any():
            continue
        labels[region] = next_label
        next_label += 1
    if next_label == 1:
        raise EmptyRegionError("all prompted regions are empty after carving")
    return LabelMask(labels)


def above_ground_mask(height_image: DepthImage, config: ProviderConfig | None = None):
    """Pixels meaningfully above the ground threshold, plus the height range.

    Ground is the configured percentile of nonzero heights; the comparison
    carries a 1e-6-of-range slack so interpolation noise on flat ground never
    fragments the mask.
    """
    config = config or ProviderConfig()
    h = height_image.values
    nonzero = h[h != 0.0]
    if len(nonzero) == 0:
        raise EmptyRegionError("height image has no surface at all")
    ground = float(np.percentile(nonzero, config.ground_percentile))
    height_range = float(nonzero.max() - nonzero.min())
    if height_range > 0:
        above = (h - ground) > 1e-6 * height_range
    else:
        above = h > ground
    return above, height_range


def _dedupe_regions(regions, iou_threshold: float):
    """Drop regions that near-duplicate a larger one; keep prompt order."""
    areas = [int(r.sum()) for r in regions]
    order = sorted(range(len(regions)), key=lambda k: (-areas[k], k))
    kept_idx: list[int] = []
    for k in order:
        duplicate = False
        for j in kept_idx:
            inter = int((regions[k] & regions[j]).sum())
            union = areas[k] + areas[j] - inter
            if union > 0 and inter / union >= iou_threshold:
                duplicate = True
                break
        if not duplicate:
            kept_idx.append(k)
    return [regions[k] for k in sorted(kept_idx)]


def _region_grow(h: np.ndarray, above: np.ndarray, u0: int, v0: int, eps: float) -> np.ndarray:
    """BFS over 4-connected above-ground pixels near the running region mean."""
    rows, cols = h.shape
    region = np.zeros_like(above)
    region[v0, u0] = True
    total = h[v0, u0]
    count = 1
    queue = deque([(v0, u0)])
    while queue:
        v, u = queue.popleft()
        for dv, du in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nv, nu = v + dv, u + du
            if 0 <= nv < rows and 0 <= nu < cols and above[nv, nu] and not region[nv, nu]:
                if abs(h[nv, nu] - total / count) < eps:
                    region[nv, nu] = True
                    total += h[nv, nu]
                    count += 1
                    queue.append((nv, nu))
    return region


def score_relevance(
    config: ProviderConfig,
    views: list[RgbImage],
    category: str,
) -> RelevanceScore:
    """Mean image-text relevance over views, or a pass-through 1.0 fallback.

    The fallback deliberately does not guess: it returns 1.0 marked
    "unscored" so no segment is silently filtered without a real scorer.
    """
    if not views:
        raise ValueError("need at least one view to score")
    if config.score_url:
        payload = {"images": [encode_image_b64(v) for v in views], "labels": [category]}
        data = _post_json(config, config.score_url, payload)
        try:
            per_view = [float(row[0]) for row in data["scores"]]
        except (KeyError, TypeError, IndexError, ValueError) as e:
            raise ProviderProtocolError("score response lacks 'scores' [[float]]") from e
        if len(per_view) != len(views):
            raise ProviderProtocolError("score count does not match view count")
        return RelevanceScore(score=float(np.mean(per_view)), label=category)
    if not config.fallback_enabled:
        raise ProviderProtocolError("no score provider configured and fallback disabled")
    return RelevanceScore(score=1.0, label=category, provenance="unscored")


def caption_segment(
    config: ProviderConfig,
    views: list[RgbImage],
    bounds: Aabb | None = None,
) -> Caption:
    """One caption for a segment from multi-view aggregation.

    With a provider: one caption per view, pick the modal string, break ties
    by longest then lexicographic. Without one: a deterministic template
    from the segment bounds.
    """
    if not views:
        raise ValueError("need at least one view to caption")
    if config.caption_url:
        texts = []
        for v in views:
            data = _post_json(config, config.caption_url, {"image": encode_image_b64(v)})
            if "caption" not in data or not isinstance(data["caption"], str) or not data["caption"]:
                raise ProviderProtocolError("caption response lacks a non-empty 'caption'")
            texts.append(data["caption"])
        counts = Counter(texts)
        best = max(counts, key=lambda t: (counts[t], len(t), t))
        return Caption(text=best, source_view_count=len(views))
    if not config.fallback_enabled:
        raise ProviderProtocolError("no caption provider configured and fallback disabled")
    if bounds is None:
        raise ValueError("fallback captioning needs segment bounds")
    w, l, h = bounds.extent
    text = f"a 3D scene segment, footprint {w:.1f}m × {l:.1f}m, height {h:.1f}m"
    return Caption(text=text, source_view_count=len(views))
