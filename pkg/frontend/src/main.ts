/**
 * Browser bootstrap: wires the DOM to the pure state machine and the API
 * client. Frame imagery is served from a static root configured via the
 * `data-image-root` attribute (template `{root}/{sequence}/{frame:06}.png`);
 * the annotation service owns everything else.
 */

import { ApiClient, ApiError, withConflictRetry } from "./api.js";
import { frameImageUrl } from "./geometry.js";
import { drawOverlay } from "./overlay.js";
import {
  applyExpressionCreated,
  applyFrame,
  applyIntervals,
  applyServerError,
  clickAt,
  highlightedObjects,
  initialState,
  scrubTo,
  selectExpression,
  selectSequence,
  withSequences,
  type UiState,
} from "./state.js";

const root = document.getElementById("labeler") as HTMLElement;
const api = new ApiClient(root.dataset.apiUrl ?? "http://127.0.0.1:8077");
const imageRoot = root.dataset.imageRoot ?? "/frames";

const sequenceSelect = root.querySelector<HTMLSelectElement>("#sequence")!;
const expressionList = root.querySelector<HTMLSelectElement>("#expressions")!;
const expressionInput = root.querySelector<HTMLInputElement>("#expression-text")!;
const expressionCreate = root.querySelector<HTMLButtonElement>("#expression-create")!;
const slider = root.querySelector<HTMLInputElement>("#frame-slider")!;
const frameLabel = root.querySelector<HTMLElement>("#frame-label")!;
const noticeBox = root.querySelector<HTMLElement>("#notice")!;
const intervalsBox = root.querySelector<HTMLElement>("#intervals")!;
const image = root.querySelector<HTMLImageElement>("#frame-image")!;
const canvas = root.querySelector<HTMLCanvasElement>("#overlay")!;

let state: UiState = initialState();

function render(): void {
  frameLabel.textContent = state.sequenceId
    ? `${state.sequenceId} — frame ${state.frame} / ${state.frameCount - 1}`
    : "no sequence";
  slider.max = String(Math.max(0, state.frameCount - 1));
  slider.value = String(state.frame);
  noticeBox.textContent = state.notice ?? "";
  intervalsBox.textContent = state.intervals
    .map((iv) => `object ${iv.object_id}: ${iv.start}–${iv.end}`)
    .join("\n");
  if (state.sequenceId) {
    image.src = frameImageUrl(imageRoot, state.sequenceId, state.frame);
  }
  const ctx = canvas.getContext("2d");
  if (ctx) {
    drawOverlay(
      ctx,
      state.boxes,
      highlightedObjects(state),
      state.pendingClick?.objectId ?? null,
    );
  }
}

function set(next: UiState): void {
  state = next;
  render();
}

async function refreshFrame(): Promise<void> {
  if (state.sequenceId === null) return;
  try {
    const payload = await api.getFrame(state.sequenceId, state.frame);
    set(applyFrame(state, payload));
  } catch (err) {
    set(applyServerError(state, err instanceof Error ? err.message : String(err)));
  }
}

async function currentRevision(): Promise<number> {
  const sequences = await api.listSequences();
  set(withSequences(state, sequences));
  return sequences.find((s) => s.sequence_id === state.sequenceId)?.revision ?? 0;
}

function renderExpressionList(): void {
  const summary = state.sequences.find((s) => s.sequence_id === state.sequenceId);
  expressionList.innerHTML = "";
  for (const expr of summary?.expressions ?? []) {
    const option = document.createElement("option");
    option.value = String(expr.id);
    option.textContent = `#${expr.id} ${expr.text}`;
    option.selected = expr.id === state.activeExpression;
    expressionList.appendChild(option);
  }
}

sequenceSelect.addEventListener("change", async () => {
  set(selectSequence(state, sequenceSelect.value));
  renderExpressionList();
  await refreshFrame();
});

slider.addEventListener("input", async () => {
  set(scrubTo(state, Number(slider.value)));
  await refreshFrame();
});

expressionList.addEventListener("change", () => {
  set(selectExpression(state, Number(expressionList.value)));
});

expressionCreate.addEventListener("click", async () => {
  const text = expressionInput.value;
  if (!text.trim()) {
    set(applyServerError(state, "expression text is empty"));
    return;
  }
  if (state.sequenceId === null) return;
  try {
    const created = await withConflictRetry(
      (revision) => api.createExpression(state.sequenceId!, text, revision),
      currentRevision,
    );
    set(applyExpressionCreated(state, created.expression_id, text.trim(), created.revision));
    renderExpressionList();
    expressionInput.value = "";
  } catch (err) {
    set(applyServerError(state, err instanceof ApiError ? err.message : String(err)));
  }
});

canvas.addEventListener("click", async (event) => {
  const rect = canvas.getBoundingClientRect();
  const point = { x: event.clientX - rect.left, y: event.clientY - rect.top };
  const { state: next, request } = clickAt(state, point);
  set(next);
  if (!request) return;
  try {
    const resp = await withConflictRetry(
      (revision) =>
        api.postClick(
          request.sequenceId,
          {
            expressionId: request.expressionId,
            objectId: request.objectId,
            start: request.start,
            end: request.end,
          },
          revision,
        ),
      currentRevision,
    );
    set(applyIntervals(state, resp.intervals, resp.revision));
    await refreshFrame();
  } catch (err) {
    set(applyServerError(state, err instanceof ApiError ? err.message : String(err)));
  }
});

(async () => {
  const sequences = await api.listSequences();
  set(withSequences(state, sequences));
  sequenceSelect.innerHTML = "";
  for (const seq of sequences) {
    const option = document.createElement("option");
    option.value = seq.sequence_id;
    option.textContent = `${seq.sequence_id} (${seq.frame_count} frames)`;
    sequenceSelect.appendChild(option);
  }
  if (sequences.length) {
    set(selectSequence(state, sequences[0].sequence_id));
    renderExpressionList();
    await refreshFrame();
  }
})();
