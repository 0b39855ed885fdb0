import type {
  ClickResponse,
  CreateExpressionResponse,
  FramePayload,
  SequenceSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = typeof fetch;

/** Thin typed client over the annotation service. Never caches mutations. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = payload as { code?: string; message?: string; field?: string };
      throw new ApiError(
        response.status,
        err.code ?? "unknown",
        err.message ?? `HTTP ${response.status}`,
        err.field,
      );
    }
    return payload as T;
  }

  listSequences(): Promise<SequenceSummary[]> {
    return this.request("GET", "/sequences");
  }

  getFrame(sequenceId: string, frame: number): Promise<FramePayload> {
    return this.request("GET", `/sequences/${sequenceId}/frames/${frame}`);
  }

  createExpression(
    sequenceId: string,
    text: string,
    revision?: number,
  ): Promise<CreateExpressionResponse> {
    return this.request("POST", `/sequences/${sequenceId}/expressions`, {
      text,
      ...(revision === undefined ? {} : { revision }),
    });
  }

  postClick(
    sequenceId: string,
    click: { expressionId: number; objectId: number; start: number; end: number },
    revision?: number,
  ): Promise<ClickResponse> {
    return this.request("POST", `/sequences/${sequenceId}/clicks`, {
      expression_id: click.expressionId,
      object_id: click.objectId,
      start: click.start,
      end: click.end,
      ...(revision === undefined ? {} : { revision }),
    });
  }

  retractReferent(
    sequenceId: string,
    expressionId: number,
    objectId: number,
    frame: number,
    revision?: number,
  ): Promise<ClickResponse> {
    return this.request(
      "DELETE",
      `/sequences/${sequenceId}/expressions/${expressionId}/referents`,
      { object_id: objectId, frame, ...(revision === undefined ? {} : { revision }) },
    );
  }
}

/**
 * Run a revision-carrying mutation with refetch-and-retry on 409 conflicts.
 * `refetchRevision` must return the sequence's current revision (e.g. from a
 * fresh GET); every other error propagates untouched.
 */
export async function withConflictRetry<T>(
  operation: (revision: number) => Promise<T>,
  refetchRevision: () => Promise<number>,
  maxAttempts = 3,
): Promise<T> {
  let revision = await refetchRevision();
  for (let attempt = 1; ; attempt++) {
    try {
      return await operation(revision);
    } catch (err) {
      if (!(err instanceof ApiError) || err.status !== 409 || attempt >= maxAttempts) {
        throw err;
      }
      revision = await refetchRevision();
    }
  }
}
