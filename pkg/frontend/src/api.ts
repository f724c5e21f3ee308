/**
 * Typed client for the workbench endpoints.
 *
 * Each view keeps at most one retrieval/summarization request in flight:
 * issuing a new request through the same RequestSlot aborts the stale one.
 * 503 responses surface as RetryableError (the UI shows a retry banner);
 * 400 responses carry field details for inline display.
 */

import type {
  EventsResponse,
  QueriesResponse,
  QueryPayload,
  RankResponse,
  SummarizeResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class RetryableError extends ApiError {}

export class FieldError extends ApiError {
  constructor(message: string, readonly detail: unknown) {
    super(message, 400);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let detail: unknown = null;
  try {
    detail = (await response.json()).detail;
  } catch {
    // non-JSON body; keep the status text
  }
  const message = typeof detail === "string" ? detail : response.statusText;
  if (response.status === 503) {
    throw new RetryableError(message || "service busy", 503);
  }
  if (response.status === 400) {
    throw new FieldError(message || "invalid request", detail);
  }
  throw new ApiError(message || `request failed (${response.status})`, response.status);
}

/** Serializes requests per view: starting a new one aborts the previous. */
export class RequestSlot {
  private controller: AbortController | null = null;

  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      return await fn(controller.signal);
    } finally {
      if (this.controller === controller) {
        this.controller = null;
      }
    }
  }

  get busy(): boolean {
    return this.controller !== null;
  }
}

export class WorkbenchApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchFn(this.base + path, { signal });
    if (!response.ok) {
      await raiseFor(response);
    }
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!response.ok) {
      await raiseFor(response);
    }
    return (await response.json()) as T;
  }

  listEvents(signal?: AbortSignal): Promise<EventsResponse> {
    return this.get("/events", signal);
  }

  listQueries(signal?: AbortSignal): Promise<QueriesResponse> {
    return this.get("/queries", signal);
  }

  saveQuery(payload: QueryPayload, signal?: AbortSignal): Promise<{ id: string }> {
    return this.post("/queries", payload, signal);
  }

  rank(
    queryId: string,
    eventId: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<RankResponse> {
    return this.post("/rank", { query_id: queryId, event_id: eventId, k }, signal);
  }

  summarize(
    queryId: string,
    eventId: string,
    mode: "regular" | "diversified",
    budget: number | null,
    signal?: AbortSignal,
  ): Promise<SummarizeResponse> {
    return this.post(
      "/summarize",
      { query_id: queryId, event_id: eventId, mode, budget },
      signal,
    );
  }
}
