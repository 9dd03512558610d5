/** Zoom/pan transform between BEV image pixels and canvas coordinates.
 *
 * The canvas handles zoom and pan entirely client-side; prompts are always
 * converted back to BEV pixel space before they reach the server.
 */

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function identity(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function imageToScreen(t: ViewTransform, u: number, v: number): [number, number] {
  return [u * t.scale + t.offsetX, v * t.scale + t.offsetY];
}

export function screenToImage(t: ViewTransform, x: number, y: number): [number, number] {
  return [(x - t.offsetX) / t.scale, (y - t.offsetY) / t.scale];
}

/** Zoom by a factor keeping the screen point (x, y) fixed. */
export function zoomAt(t: ViewTransform, x: number, y: number, factor: number): ViewTransform {
  const scale = Math.min(64, Math.max(1 / 64, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    offsetX: x - (x - t.offsetX) * applied,
    offsetY: y - (y - t.offsetY) * applied,
  };
}

export function panBy(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { ...t, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/** Fit an image into a viewport, centered. */
export function fitImage(
  imageWidth: number,
  imageHeight: number,
  viewWidth: number,
  viewHeight: number,
): ViewTransform {
  const scale = Math.min(viewWidth / imageWidth, viewHeight / imageHeight);
  return {
    scale,
    offsetX: (viewWidth - imageWidth * scale) / 2,
    offsetY: (viewHeight - imageHeight * scale) / 2,
  };
}
