/** BEV prompt canvas: gestures in, prompt actions out.
 *
 * Left-click adds a foreground point, modifier-click (Alt/Ctrl/Shift) a
 * background point, left-drag draws a box. Wheel zooms at the cursor and
 * middle/right-drag pans; zoom and pan stay client-side, actions carry BEV
 * pixel coordinates. No gesture here talks to the server.
 */

import type { ApiBox, ApiPoint } from "./api.js";
import {
  ViewTransform,
  fitImage,
  identity,
  imageToScreen,
  panBy,
  screenToImage,
  zoomAt,
} from "./transform.js";

export type CanvasAction =
  | { type: "point"; u: number; v: number; polarity: "foreground" | "background" }
  | { type: "box"; u0: number; v0: number; u1: number; v1: number };

const CLICK_SLOP_PX = 3;

const MASK_PALETTE = [
  [230, 60, 60], [60, 140, 230], [70, 190, 90], [230, 170, 40],
  [170, 80, 220], [40, 200, 200], [240, 110, 180], [150, 150, 60],
];

/** RGBA bytes for a label mask: background transparent, labels from a
 * palette. Plain bytes so it also runs outside a DOM. */
export function colorizeMask(labels: Uint16Array): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(new ArrayBuffer(4 * labels.length));
  for (let i = 0; i < labels.length; i++) {
    const label = labels[i];
    if (label === 0) continue;
    const [r, g, b] = MASK_PALETTE[(label - 1) % MASK_PALETTE.length];
    rgba[4 * i] = r;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = b;
    rgba[4 * i + 3] = 255;
  }
  return rgba;
}

interface DragState {
  startX: number;
  startY: number;
  lastX: number;
  lastY: number;
  button: number;
  modifier: boolean;
  moved: boolean;
}

export class PromptCanvas {
  private transform: ViewTransform = identity();
  private image: CanvasImageSource | null = null;
  private overlay: CanvasImageSource | null = null;
  private imageWidth = 0;
  private imageHeight = 0;
  private points: ApiPoint[] = [];
  private boxes: ApiBox[] = [];
  private drag: DragState | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private dispatch: (action: CanvasAction) => void,
  ) {
    canvas.addEventListener("pointerdown", (e) => this.onDown(e as PointerEvent));
    canvas.addEventListener("pointermove", (e) => this.onMove(e as PointerEvent));
    canvas.addEventListener("pointerup", (e) => this.onUp(e as PointerEvent));
    canvas.addEventListener("wheel", (e) => this.onWheel(e as WheelEvent), { passive: false });
    canvas.addEventListener("contextmenu", (e) => e.preventDefault());
  }

  setImage(image: CanvasImageSource | null, width: number, height: number): void {
    this.image = image;
    this.imageWidth = width;
    this.imageHeight = height;
    this.transform = fitImage(width, height, this.canvas.width, this.canvas.height);
    this.draw();
  }

  setOverlay(overlay: CanvasImageSource | null): void {
    this.overlay = overlay;
    this.draw();
  }

  setPrompts(points: ApiPoint[], boxes: ApiBox[]): void {
    this.points = points;
    this.boxes = boxes;
    this.draw();
  }

  private local(e: { clientX: number; clientY: number }): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [e.clientX - rect.left, e.clientY - rect.top];
  }

  private onDown(e: PointerEvent): void {
    const [x, y] = this.local(e);
    this.drag = {
      startX: x,
      startY: y,
      lastX: x,
      lastY: y,
      button: e.button,
      modifier: e.altKey || e.ctrlKey || e.shiftKey,
      moved: false,
    };
  }

  private onMove(e: PointerEvent): void {
    if (!this.drag) return;
    const [x, y] = this.local(e);
    if (Math.hypot(x - this.drag.startX, y - this.drag.startY) > CLICK_SLOP_PX) {
      this.drag.moved = true;
    }
    if (this.drag.button !== 0) {
      this.transform = panBy(this.transform, x - this.drag.lastX, y - this.drag.lastY);
    }
    this.drag.lastX = x;
    this.drag.lastY = y;
    this.draw();
  }

  private onUp(e: PointerEvent): void {
    const drag = this.drag;
    this.drag = null;
    if (!drag) return;
    const [x, y] = this.local(e);
    if (drag.button !== 0) {
      return; // pan gesture, already applied
    }
    if (!drag.moved) {
      const [u, v] = screenToImage(this.transform, x, y);
      this.dispatch({
        type: "point",
        u: Math.floor(u),
        v: Math.floor(v),
        polarity: drag.modifier ? "background" : "foreground",
      });
    } else {
      const [u0, v0] = screenToImage(this.transform, drag.startX, drag.startY);
      const [u1, v1] = screenToImage(this.transform, x, y);
      this.dispatch({
        type: "box",
        u0: Math.floor(Math.min(u0, u1)),
        v0: Math.floor(Math.min(v0, v1)),
        u1: Math.ceil(Math.max(u0, u1)),
        v1: Math.ceil(Math.max(v0, v1)),
      });
    }
    this.draw();
  }

  private onWheel(e: WheelEvent): void {
    e.preventDefault();
    const [x, y] = this.local(e);
    this.transform = zoomAt(this.transform, x, y, e.deltaY < 0 ? 1.2 : 1 / 1.2);
    this.draw();
  }

  draw(): void {
    let ctx: CanvasRenderingContext2D | null;
    try {
      ctx = this.canvas.getContext("2d");
    } catch {
      return; // headless test environment without canvas support
    }
    if (!ctx) return;
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const t = this.transform;
    ctx.setTransform(t.scale, 0, 0, t.scale, t.offsetX, t.offsetY);
    ctx.imageSmoothingEnabled = false;
    if (this.image) {
      ctx.drawImage(this.image, 0, 0, this.imageWidth, this.imageHeight);
    }
    if (this.overlay) {
      ctx.globalAlpha = 0.5; // mask overlay renders at 50% opacity
      ctx.drawImage(this.overlay, 0, 0, this.imageWidth, this.imageHeight);
      ctx.globalAlpha = 1.0;
    }
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    for (const box of this.boxes) {
      const [x0, y0] = imageToScreen(t, box.u_min, box.v_min);
      const [x1, y1] = imageToScreen(t, box.u_max, box.v_max);
      ctx.strokeStyle = "#ffd24d";
      ctx.lineWidth = 2;
      ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
    }
    if (this.drag && this.drag.button === 0 && this.drag.moved) {
      ctx.strokeStyle = "#ffd24d88";
      ctx.setLineDash([6, 4]);
      ctx.strokeRect(
        this.drag.startX, this.drag.startY,
        this.drag.lastX - this.drag.startX, this.drag.lastY - this.drag.startY,
      );
      ctx.setLineDash([]);
    }
    for (const p of this.points) {
      const [x, y] = imageToScreen(t, p.u + 0.5, p.v + 0.5);
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.fillStyle = p.polarity === "foreground" ? "#3fd13f" : "#e04343";
      ctx.fill();
      ctx.strokeStyle = "#ffffff";
      ctx.lineWidth = 1.5;
      ctx.stroke();
    }
  }
}
