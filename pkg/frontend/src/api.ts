/** Typed client for the segmentation service HTTP API. */

export interface ApiPoint {
  u: number;
  v: number;
  polarity: "foreground" | "background";
}

export interface ApiBox {
  u_min: number;
  v_min: number;
  u_max: number;
  v_max: number;
}

export interface SceneInfo {
  id: string;
  name: string;
  status: string;
}

export interface SegmentInfo {
  id: string;
  label: number;
  triangle_count: number;
  relevance: number | null;
  status: string;
  provenance: string;
  preview_url: string;
}

export interface JobStatus {
  state: "queued" | "running" | "succeeded" | "failed";
  result: Record<string, unknown> | null;
  error: string | null;
}

export interface MaskResponse {
  mask_id: string;
  mask: string; // base64 16-bit PNG
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
  } catch {
    return resp.statusText;
  }
}

export class Client {
  constructor(private base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await parseError(resp));
    }
    return (await resp.json()) as T;
  }

  listScenes(): Promise<SceneInfo[]> {
    return this.request("/api/scenes");
  }

  uploadScene(file: Blob, name: string): Promise<{ id: string }> {
    const form = new FormData();
    form.append("file", file, name);
    return this.request("/api/scenes", { method: "POST", body: form });
  }

  bevUrl(sceneId: string, kind: "rgb" | "height" = "rgb"): string {
    return `${this.base}/api/scenes/${sceneId}/bev?kind=${kind}`;
  }

  postPrompts(
    sceneId: string,
    points: ApiPoint[],
    boxes: ApiBox[],
    requestId?: string,
  ): Promise<MaskResponse> {
    return this.request(`/api/scenes/${sceneId}/prompts`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ points, boxes, request_id: requestId ?? null }),
    });
  }

  postSlice(sceneId: string, maskId: string, requestId?: string): Promise<{ job_id: string }> {
    return this.request(`/api/scenes/${sceneId}/slice`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ mask_id: maskId, request_id: requestId ?? null }),
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request(`/api/jobs/${jobId}`);
  }

  listSegments(sceneId: string): Promise<SegmentInfo[]> {
    return this.request(`/api/scenes/${sceneId}/segments`);
  }

  review(segmentId: string, decision: "accept" | "reject"): Promise<{ status: string }> {
    return this.request(`/api/segments/${segmentId}/review`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ decision }),
    });
  }

  exportScene(sceneId: string, acceptedOnly: boolean, requestId?: string): Promise<{ job_id: string }> {
    return this.request(`/api/scenes/${sceneId}/export`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ accepted_only: acceptedOnly, request_id: requestId ?? null }),
    });
  }
}
