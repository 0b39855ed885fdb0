/** JSON shapes exchanged with the annotation service. */

export interface ExpressionSummary {
  id: number;
  text: string;
  referent_count: number;
}

export interface SequenceSummary {
  sequence_id: string;
  frame_count: number;
  frame_w: number;
  frame_h: number;
  revision: number;
  expressions: ExpressionSummary[];
}

/** Axis-aligned box as [x1, y1, x2, y2] in pixels. */
export type BoxCoords = [number, number, number, number];

export interface FrameBox {
  object_id: number;
  category: string;
  box: BoxCoords;
}

export interface FramePayload {
  sequence_id: string;
  frame: number;
  boxes: FrameBox[];
  /** expression id (as string key) -> referent object ids at this frame */
  referents: Record<string, number[]>;
  revision: number;
}

export interface ReferentInterval {
  object_id: number;
  start: number;
  end: number;
}

export interface ClickResponse {
  expression_id: number;
  object_id: number;
  intervals: ReferentInterval[];
  revision: number;
}

export interface CreateExpressionResponse {
  expression_id: number;
  revision: number;
}

export interface Point {
  x: number;
  y: number;
}
