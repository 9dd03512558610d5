/** Segment review panel: thumbnails, counts, relevance, accept/reject. */

import type { SegmentInfo } from "./api.js";
import { isDecided } from "./state.js";

export interface PanelHandlers {
  onReview(segmentId: string, decision: "accept" | "reject"): void;
  onExport(acceptedOnly: boolean): void;
}

export function renderPanel(
  container: HTMLElement,
  segments: SegmentInfo[],
  exportFiles: string[] | null,
  handlers: PanelHandlers,
): void {
  container.textContent = "";
  if (segments.length === 0) {
    const empty = document.createElement("p");
    empty.className = "muted";
    empty.textContent = "No segments yet. Run a mask and slice the scene.";
    container.appendChild(empty);
    return;
  }

  const table = document.createElement("table");
  table.className = "segments";
  const head = table.insertRow();
  for (const title of ["preview", "segment", "triangles", "relevance", "status", "review"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }

  for (const segment of segments) {
    const row = table.insertRow();
    row.dataset.segmentId = segment.id;
    if (isDecided(segment)) {
      row.classList.add("decided");
    }

    const thumb = document.createElement("img");
    thumb.src = segment.preview_url;
    thumb.width = 64;
    thumb.height = 64;
    thumb.alt = segment.id;
    row.insertCell().appendChild(thumb);

    row.insertCell().textContent = segment.id;
    row.insertCell().textContent = String(segment.triangle_count);
    row.insertCell().textContent =
      segment.relevance === null ? "-" : segment.relevance.toFixed(2);
    const status = row.insertCell();
    status.textContent = segment.status;
    status.className = `status-${segment.status}`;

    const actions = row.insertCell();
    for (const decision of ["accept", "reject"] as const) {
      const button = document.createElement("button");
      button.textContent = decision;
      button.disabled = isDecided(segment); // decided rows are locked
      button.addEventListener("click", () => handlers.onReview(segment.id, decision));
      actions.appendChild(button);
    }
  }
  container.appendChild(table);

  const exportRow = document.createElement("div");
  exportRow.className = "export-row";
  const exportButton = document.createElement("button");
  exportButton.textContent = "Export accepted";
  exportButton.addEventListener("click", () => handlers.onExport(true));
  exportRow.appendChild(exportButton);
  const exportAll = document.createElement("button");
  exportAll.textContent = "Export all";
  exportAll.addEventListener("click", () => handlers.onExport(false));
  exportRow.appendChild(exportAll);
  container.appendChild(exportRow);

  if (exportFiles && exportFiles.length > 0) {
    const done = document.createElement("p");
    done.className = "export-done";
    done.textContent = `Exported ${exportFiles.length} file(s): ${exportFiles.join(", ")}`;
    container.appendChild(done);
  }
}
