import type { BoxCoords, FrameBox, Point } from "./types.js";

export function boxArea(box: BoxCoords): number {
  return Math.max(0, box[2] - box[0]) * Math.max(0, box[3] - box[1]);
}

export function pointInBox(point: Point, box: BoxCoords): boolean {
  return (
    point.x >= box[0] && point.x <= box[2] && point.y >= box[1] && point.y <= box[3]
  );
}

/**
 * Resolve a click to an object id. When several boxes contain the point the
 * smallest one wins (the intended target for nested boxes); equal areas fall
 * back to the lower object id for determinism. Returns null on empty space.
 */
export function resolveClick(point: Point, boxes: FrameBox[]): number | null {
  let best: FrameBox | null = null;
  for (const candidate of boxes) {
    if (!pointInBox(point, candidate.box)) continue;
    if (
      best === null ||
      boxArea(candidate.box) < boxArea(best.box) ||
      (boxArea(candidate.box) === boxArea(best.box) &&
        candidate.object_id < best.object_id)
    ) {
      best = candidate;
    }
  }
  return best === null ? null : best.object_id;
}

/** Frame image location: `{root}/{sequence}/{frame padded to 6 digits}.png`. */
export function frameImageUrl(root: string, sequenceId: string, frame: number): string {
  const padded = String(frame).padStart(6, "0");
  return `${root.replace(/\/$/, "")}/${sequenceId}/${padded}.png`;
}
