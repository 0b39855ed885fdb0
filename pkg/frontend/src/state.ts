/**
 * Pure UI state machine for the labeler.
 *
 * The state is a function of the last server responses plus the pending
 * click; transitions never talk to the network themselves. Where an action
 * requires a server call, the transition returns a request descriptor and
 * the caller (main.ts in the browser, tests anywhere else) performs it and
 * feeds the response back in. Reloading the page and replaying the GETs
 * therefore reconstructs the identical display.
 */

import { resolveClick } from "./geometry.js";
import type {
  FrameBox,
  FramePayload,
  Point,
  ReferentInterval,
  SequenceSummary,
} from "./types.js";

export interface UiState {
  sequences: SequenceSummary[];
  sequenceId: string | null;
  frameCount: number;
  frame: number;
  revision: number;
  activeExpression: number | null;
  boxes: FrameBox[];
  /** referent object ids at the current frame, keyed by expression id */
  referents: Record<string, number[]>;
  /** intervals of the active expression, as last reported by the server */
  intervals: ReferentInterval[];
  pendingClick: { objectId: number; frame: number } | null;
  notice: string | null;
}

export interface ClickRequest {
  sequenceId: string;
  expressionId: number;
  objectId: number;
  start: number;
  end: number;
}

export function initialState(): UiState {
  return {
    sequences: [],
    sequenceId: null,
    frameCount: 0,
    frame: 0,
    revision: 0,
    activeExpression: null,
    boxes: [],
    referents: {},
    intervals: [],
    pendingClick: null,
    notice: null,
  };
}

export function withSequences(state: UiState, sequences: SequenceSummary[]): UiState {
  return { ...state, sequences };
}

/** Selecting a sequence resets the cursor and clears any half-finished pair. */
export function selectSequence(state: UiState, sequenceId: string): UiState {
  const summary = state.sequences.find((s) => s.sequence_id === sequenceId);
  if (!summary) {
    return { ...state, notice: `unknown sequence ${sequenceId}` };
  }
  return {
    ...state,
    sequenceId,
    frameCount: summary.frame_count,
    frame: 0,
    revision: summary.revision,
    activeExpression: null,
    boxes: [],
    referents: {},
    intervals: [],
    pendingClick: null,
    notice: null,
  };
}

/** Clamp scrubbing into [0, frameCount); the pending click survives scrubs. */
export function scrubTo(state: UiState, frame: number): UiState {
  if (state.sequenceId === null) return state;
  const clamped = Math.min(Math.max(frame, 0), state.frameCount - 1);
  const notice =
    clamped === frame ? null : `frame ${frame} is out of range, showing ${clamped}`;
  return { ...state, frame: clamped, notice };
}

/** Install a GET /frames response; ignores stale payloads for other frames. */
export function applyFrame(state: UiState, payload: FramePayload): UiState {
  if (payload.sequence_id !== state.sequenceId || payload.frame !== state.frame) {
    return state;
  }
  return {
    ...state,
    boxes: payload.boxes,
    referents: payload.referents,
    revision: payload.revision,
  };
}

/** Switching expressions clears the pending click and interval display. */
export function selectExpression(state: UiState, expressionId: number): UiState {
  return {
    ...state,
    activeExpression: expressionId,
    pendingClick: null,
    intervals: [],
    notice: null,
  };
}

export function applyExpressionCreated(
  state: UiState,
  expressionId: number,
  text: string,
  revision: number,
): UiState {
  const sequences = state.sequences.map((s) =>
    s.sequence_id === state.sequenceId
      ? {
          ...s,
          revision,
          expressions: [...s.expressions, { id: expressionId, text, referent_count: 0 }],
        }
      : s,
  );
  return {
    ...selectExpression({ ...state, sequences }, expressionId),
    revision,
    notice: null,
  };
}

/**
 * Handle a click on the frame canvas. First click on a box arms the pair;
 * a second click on the same object yields a ClickRequest for the caller to
 * POST. A second click on a different object rejects and resets the pair.
 */
export function clickAt(
  state: UiState,
  point: Point,
): { state: UiState; request?: ClickRequest } {
  if (state.sequenceId === null) {
    return { state: { ...state, notice: "select a sequence first" } };
  }
  if (state.activeExpression === null) {
    return { state: { ...state, notice: "select or create an expression first" } };
  }
  const objectId = resolveClick(point, state.boxes);
  if (objectId === null) {
    return { state: { ...state, notice: "no box under the click" } };
  }
  if (state.pendingClick === null) {
    return {
      state: {
        ...state,
        pendingClick: { objectId, frame: state.frame },
        notice: `object ${objectId} armed at frame ${state.frame}; click it again at the end frame`,
      },
    };
  }
  if (state.pendingClick.objectId !== objectId) {
    return {
      state: {
        ...state,
        pendingClick: null,
        notice: `pair reset: second click hit object ${objectId}, expected ${state.pendingClick.objectId}`,
      },
    };
  }
  const request: ClickRequest = {
    sequenceId: state.sequenceId,
    expressionId: state.activeExpression,
    objectId,
    start: Math.min(state.pendingClick.frame, state.frame),
    end: Math.max(state.pendingClick.frame, state.frame),
  };
  return { state: { ...state, pendingClick: null, notice: null }, request };
}

/** Install a click/retract response: the server owns the interval truth. */
export function applyIntervals(
  state: UiState,
  intervals: ReferentInterval[],
  revision: number,
): UiState {
  return { ...state, intervals, revision, notice: null };
}

/** Surface a server rejection inline; an armed pair is discarded. */
export function applyServerError(state: UiState, message: string): UiState {
  return { ...state, pendingClick: null, notice: message };
}

/** Object ids to render highlighted: referents of the active expression. */
export function highlightedObjects(state: UiState): Set<number> {
  if (state.activeExpression === null) return new Set();
  return new Set(state.referents[String(state.activeExpression)] ?? []);
}
