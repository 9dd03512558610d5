/** Annotation state and its pure transitions.
 *
 * The state is a pure function of server responses plus the local pending
 * prompts: every transition returns a new object, so reloading the page
 * reconstructs everything except prompts that were never run.
 */

import type { ApiBox, ApiPoint, SegmentInfo } from "./api.js";

export interface ImageSize {
  width: number;
  height: number;
}

export interface ExportResult {
  dir: string;
  files: string[];
}

export interface AnnotationState {
  sceneId: string | null;
  imageSize: ImageSize | null;
  points: ApiPoint[];
  boxes: ApiBox[];
  maskId: string | null;
  maskOverlay: string | null; // data URL for the 50%-opacity overlay
  maskPending: boolean; // at most one mask request in flight per scene
  segments: SegmentInfo[];
  inFlightJobs: string[];
  exportResult: ExportResult | null;
  error: string | null;
}

export function initialState(): AnnotationState {
  return {
    sceneId: null,
    imageSize: null,
    points: [],
    boxes: [],
    maskId: null,
    maskOverlay: null,
    maskPending: false,
    segments: [],
    inFlightJobs: [],
    exportResult: null,
    error: null,
  };
}

export function selectScene(
  state: AnnotationState,
  sceneId: string,
  imageSize: ImageSize,
): AnnotationState {
  return { ...initialState(), sceneId, imageSize };
}

function inBounds(state: AnnotationState, u: number, v: number): boolean {
  const size = state.imageSize;
  return size !== null && u >= 0 && v >= 0 && u < size.width && v < size.height;
}

/** Add a point prompt; clicks outside the displayed image are ignored. */
export function addPoint(
  state: AnnotationState,
  u: number,
  v: number,
  polarity: "foreground" | "background" = "foreground",
): AnnotationState {
  if (!inBounds(state, u, v)) {
    return state;
  }
  return { ...state, points: [...state.points, { u, v, polarity }], error: null };
}

/** Add a box prompt from any two drag corners; degenerate boxes are ignored. */
export function addBox(
  state: AnnotationState,
  u0: number,
  v0: number,
  u1: number,
  v1: number,
): AnnotationState {
  if (state.imageSize === null) {
    return state;
  }
  const box: ApiBox = {
    u_min: Math.max(0, Math.min(u0, u1)),
    v_min: Math.max(0, Math.min(v0, v1)),
    u_max: Math.min(state.imageSize.width, Math.max(u0, u1)),
    v_max: Math.min(state.imageSize.height, Math.max(v0, v1)),
  };
  if (box.u_min >= box.u_max || box.v_min >= box.v_max) {
    return state;
  }
  return { ...state, boxes: [...state.boxes, box], error: null };
}

export function clearPrompts(state: AnnotationState): AnnotationState {
  return { ...state, points: [], boxes: [], error: null };
}

/** Run is enabled only with at least one prompt and no request in flight. */
export function canRun(state: AnnotationState): boolean {
  return (
    state.sceneId !== null &&
    !state.maskPending &&
    state.points.length + state.boxes.length > 0
  );
}

export function maskRequested(state: AnnotationState): AnnotationState {
  return { ...state, maskPending: true, error: null };
}

export function maskReceived(
  state: AnnotationState,
  maskId: string,
  overlayDataUrl: string,
): AnnotationState {
  return { ...state, maskPending: false, maskId, maskOverlay: overlayDataUrl };
}

/** API errors are shown inline; prompts are preserved for a retry. */
export function requestFailed(state: AnnotationState, message: string): AnnotationState {
  return { ...state, maskPending: false, error: message };
}

export function jobStarted(state: AnnotationState, jobId: string): AnnotationState {
  return { ...state, inFlightJobs: [...state.inFlightJobs, jobId], error: null };
}

export function jobFinished(state: AnnotationState, jobId: string): AnnotationState {
  return { ...state, inFlightJobs: state.inFlightJobs.filter((j) => j !== jobId) };
}

export function segmentsLoaded(state: AnnotationState, segments: SegmentInfo[]): AnnotationState {
  return { ...state, segments };
}

/** Reflect a successful review locally; the row is locked by its status. */
export function reviewApplied(
  state: AnnotationState,
  segmentId: string,
  status: string,
): AnnotationState {
  return {
    ...state,
    segments: state.segments.map((s) => (s.id === segmentId ? { ...s, status } : s)),
  };
}

export function exportFinished(state: AnnotationState, result: ExportResult): AnnotationState {
  return { ...state, exportResult: result };
}

export function isDecided(segment: SegmentInfo): boolean {
  return segment.status === "accepted" || segment.status === "rejected";
}
