/** Wires the scene list, prompt canvas, and review panel to the service. */

import { ApiError, Client } from "./api.js";
import { CanvasAction, PromptCanvas, colorizeMask } from "./canvas.js";
import { base64ToBytes, decodeMaskPng } from "./maskpng.js";
import { pollJob } from "./poll.js";
import * as st from "./state.js";
import { renderPanel } from "./panel.js";

const client = new Client("");
let state = st.initialState();

const sceneSelect = document.getElementById("scene-select") as HTMLSelectElement;
const uploadInput = document.getElementById("scene-upload") as HTMLInputElement;
const runButton = document.getElementById("run-button") as HTMLButtonElement;
const clearButton = document.getElementById("clear-button") as HTMLButtonElement;
const sliceButton = document.getElementById("slice-button") as HTMLButtonElement;
const errorBox = document.getElementById("error-box") as HTMLElement;
const panelBox = document.getElementById("segment-panel") as HTMLElement;
const canvasEl = document.getElementById("bev-canvas") as HTMLCanvasElement;

function onCanvasAction(action: CanvasAction): void {
  if (action.type === "point") {
    state = st.addPoint(state, action.u, action.v, action.polarity);
  } else {
    state = st.addBox(state, action.u0, action.v0, action.u1, action.v1);
  }
  sync();
}

const canvas = new PromptCanvas(canvasEl, onCanvasAction);

function sync(): void {
  runButton.disabled = !st.canRun(state);
  clearButton.disabled = state.points.length + state.boxes.length === 0;
  sliceButton.disabled = state.maskId === null;
  errorBox.textContent = state.error ?? "";
  errorBox.hidden = state.error === null;
  canvas.setPrompts(state.points, state.boxes);
  renderPanel(panelBox, state.segments, state.exportResult?.files ?? null, {
    onReview: review,
    onExport: exportSegments,
  });
}

function fail(err: unknown): void {
  const message = err instanceof Error ? err.message : String(err);
  state = st.requestFailed(state, message);
  sync();
}

async function refreshScenes(): Promise<void> {
  const scenes = await client.listScenes();
  sceneSelect.textContent = "";
  const placeholder = document.createElement("option");
  placeholder.textContent = scenes.length ? "select a scene" : "upload a scene to begin";
  placeholder.value = "";
  sceneSelect.appendChild(placeholder);
  for (const scene of scenes) {
    const option = document.createElement("option");
    option.value = scene.id;
    option.textContent = `${scene.name} (${scene.status})`;
    sceneSelect.appendChild(option);
  }
}

async function openScene(sceneId: string): Promise<void> {
  const image = new Image();
  image.src = client.bevUrl(sceneId, "rgb");
  await image.decode();
  state = st.selectScene(state, sceneId, { width: image.naturalWidth, height: image.naturalHeight });
  canvas.setImage(image, image.naturalWidth, image.naturalHeight);
  canvas.setOverlay(null);
  await reloadSegments();
  sync();
}

async function reloadSegments(): Promise<void> {
  if (!state.sceneId) return;
  state = st.segmentsLoaded(state, await client.listSegments(state.sceneId));
}

async function runMask(): Promise<void> {
  const sceneId = state.sceneId;
  if (!st.canRun(state) || sceneId === null) return;
  state = st.maskRequested(state);
  sync();
  try {
    const resp = await client.postPrompts(sceneId, state.points, state.boxes,
                                          crypto.randomUUID());
    const mask = await decodeMaskPng(base64ToBytes(resp.mask));
    const off = document.createElement("canvas");
    off.width = mask.width;
    off.height = mask.height;
    const rgba = new ImageData(colorizeMask(mask.labels), mask.width, mask.height);
    off.getContext("2d")!.putImageData(rgba, 0, 0);
    const overlayUrl = off.toDataURL();
    state = st.maskReceived(state, resp.mask_id, overlayUrl);
    const overlayImage = new Image();
    overlayImage.src = overlayUrl;
    await overlayImage.decode();
    canvas.setOverlay(overlayImage);
  } catch (err) {
    fail(err);
    return;
  }
  sync();
}

async function runSlice(): Promise<void> {
  if (!state.sceneId || !state.maskId) return;
  try {
    const { job_id } = await client.postSlice(state.sceneId, state.maskId, crypto.randomUUID());
    state = st.jobStarted(state, job_id);
    sync();
    await pollJob(client, job_id);
    state = st.jobFinished(state, job_id);
    await reloadSegments();
  } catch (err) {
    fail(err);
    return;
  }
  sync();
}

async function review(segmentId: string, decision: "accept" | "reject"): Promise<void> {
  try {
    const { status } = await client.review(segmentId, decision);
    state = st.reviewApplied(state, segmentId, status);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await reloadSegments(); // conflicting decision: refresh from server state
    } else {
      fail(err);
      return;
    }
  }
  sync();
}

async function exportSegments(acceptedOnly: boolean): Promise<void> {
  if (!state.sceneId) return;
  try {
    const { job_id } = await client.exportScene(state.sceneId, acceptedOnly, crypto.randomUUID());
    state = st.jobStarted(state, job_id);
    sync();
    const job = await pollJob(client, job_id);
    state = st.jobFinished(state, job_id);
    state = st.exportFinished(state, job.result as unknown as st.ExportResult);
  } catch (err) {
    fail(err);
    return;
  }
  sync();
}

sceneSelect.addEventListener("change", () => {
  if (sceneSelect.value) {
    openScene(sceneSelect.value).catch(fail);
  }
});

uploadInput.addEventListener("change", async () => {
  const file = uploadInput.files?.[0];
  if (!file) return;
  try {
    const { id } = await client.uploadScene(file, file.name);
    await refreshScenes();
    sceneSelect.value = id;
    await openScene(id);
  } catch (err) {
    fail(err);
  }
});

runButton.addEventListener("click", () => void runMask());
clearButton.addEventListener("click", () => {
  state = st.clearPrompts(state);
  canvas.setOverlay(null);
  sync();
});
sliceButton.addEventListener("click", () => void runSlice());

refreshScenes().then(sync).catch(fail);
