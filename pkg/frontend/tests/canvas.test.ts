// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import type { CanvasAction } from "../src/canvas.js";
import { PromptCanvas, colorizeMask } from "../src/canvas.js";

let canvasEl: HTMLCanvasElement;
let actions: CanvasAction[];

function mouse(type: string, x: number, y: number, init: MouseEventInit = {}): void {
  canvasEl.dispatchEvent(new MouseEvent(type, { clientX: x, clientY: y, button: 0, ...init }));
}

beforeEach(() => {
  canvasEl = document.createElement("canvas");
  canvasEl.width = 760;
  canvasEl.height = 760;
  // jsdom has no 2d context; drawing is skipped, gestures still work
  canvasEl.getContext = (() => null) as typeof canvasEl.getContext;
  document.body.appendChild(canvasEl);
  actions = [];
  new PromptCanvas(canvasEl, (a) => actions.push(a));
});

describe("prompt gestures", () => {
  it("click adds a foreground point at that pixel", () => {
    mouse("pointerdown", 100.5, 120.5);
    mouse("pointerup", 100.5, 120.5);
    expect(actions).toEqual([{ type: "point", u: 100, v: 120, polarity: "foreground" }]);
  });

  it("modifier-click adds a background point", () => {
    mouse("pointerdown", 30.5, 40.5, { altKey: true });
    mouse("pointerup", 30.5, 40.5, { altKey: true });
    expect(actions).toEqual([{ type: "point", u: 30, v: 40, polarity: "background" }]);
  });

  it("drag draws a box between the corners", () => {
    mouse("pointerdown", 10, 10);
    mouse("pointermove", 30, 40);
    mouse("pointerup", 50, 60);
    expect(actions).toEqual([{ type: "box", u0: 10, v0: 10, u1: 50, v1: 60 }]);
  });

  it("tiny jitter still counts as a click", () => {
    mouse("pointerdown", 10, 10);
    mouse("pointermove", 11, 11);
    mouse("pointerup", 11, 11);
    expect(actions[0].type).toBe("point");
  });

  it("wheel zoom rescales subsequent clicks into image space", () => {
    canvasEl.dispatchEvent(new WheelEvent("wheel", { clientX: 0, clientY: 0, deltaY: -1 }));
    // scale is now 1.2 anchored at (0,0): screen 120 -> image 100
    mouse("pointerdown", 120.6, 120.6);
    mouse("pointerup", 120.6, 120.6);
    expect(actions).toEqual([{ type: "point", u: 100, v: 100, polarity: "foreground" }]);
  });

  it("right-drag pans without emitting prompts", () => {
    mouse("pointerdown", 100, 100, { button: 2 });
    mouse("pointermove", 150, 130, { button: 2 });
    mouse("pointerup", 150, 130, { button: 2 });
    expect(actions).toHaveLength(0);
    // the pan shifted the view: a click at screen (60.5, 40.5) is image (10, 10)
    mouse("pointerdown", 60.5, 40.5);
    mouse("pointerup", 60.5, 40.5);
    expect(actions).toEqual([{ type: "point", u: 10, v: 10, polarity: "foreground" }]);
  });
});

describe("mask colorization", () => {
  it("background stays transparent, labels get palette colors", () => {
    const labels = new Uint16Array([0, 1, 2, 1]);
    const rgba = colorizeMask(labels);
    expect(rgba[3]).toBe(0); // label 0: alpha 0
    expect(rgba[7]).toBe(255); // label 1 opaque
    const first = Array.from(rgba.slice(4, 7));
    const second = Array.from(rgba.slice(8, 11));
    const fourth = Array.from(rgba.slice(12, 15));
    expect(first).not.toEqual(second); // distinct labels, distinct colors
    expect(fourth).toEqual(first); // same label, same color
  });
});
