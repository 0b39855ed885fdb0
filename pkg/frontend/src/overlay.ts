import type { FrameBox } from "./types.js";

export interface OverlayStyle {
  stroke: string;
  highlightStroke: string;
  highlightFill: string;
  pendingStroke: string;
  labelFont: string;
}

export const DEFAULT_STYLE: OverlayStyle = {
  stroke: "#3af23a",
  highlightStroke: "#ffb300",
  highlightFill: "rgba(255, 179, 0, 0.18)",
  pendingStroke: "#ff4d6d",
  labelFont: "12px monospace",
};

/** Draw the frame's boxes, highlighting referents and the armed pending box. */
export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  boxes: FrameBox[],
  highlighted: Set<number>,
  pendingObjectId: number | null,
  style: OverlayStyle = DEFAULT_STYLE,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.font = style.labelFont;
  for (const { object_id, category, box } of boxes) {
    const [x1, y1, x2, y2] = box;
    const w = x2 - x1;
    const h = y2 - y1;
    if (highlighted.has(object_id)) {
      ctx.fillStyle = style.highlightFill;
      ctx.fillRect(x1, y1, w, h);
      ctx.strokeStyle = style.highlightStroke;
    } else {
      ctx.strokeStyle = style.stroke;
    }
    if (object_id === pendingObjectId) {
      ctx.strokeStyle = style.pendingStroke;
    }
    ctx.lineWidth = object_id === pendingObjectId ? 3 : 2;
    ctx.strokeRect(x1, y1, w, h);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(`#${object_id} ${category}`, x1 + 2, Math.max(10, y1 - 3));
  }
}
