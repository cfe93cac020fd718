/** API client with the dashboard's concurrency rules baked in.
 *
 * One in-flight request per view: starting a new fetch for a view aborts
 * the previous one. A response is delivered only if it is still the
 * current request for its view and its build_id matches the snapshot the
 * server reported when the request began; anything else resolves null
 * and the caller keeps its current rendering.
 */

import type { ErrorBody, MetaPayload } from "./types.js";
import type { ViewName } from "./state.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

interface Stamped {
  build_id: string;
}

export class ApiClient {
  private readonly seq = new Map<ViewName, number>();
  private readonly inflight = new Map<ViewName, AbortController>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = (await response.json()) as T | ErrorBody;
    if (!response.ok) {
      const err = (body as ErrorBody).error;
      throw new ApiError(response.status, err?.code ?? "unknown", err?.message ?? "request failed");
    }
    return body as T;
  }

  post<T>(path: string, payload: unknown, init?: RequestInit): Promise<T> {
    return this.json<T>(path, {
      ...init,
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  /** Fetch a view's data against the current snapshot. Returns null for
   * superseded requests and for responses from a different build than
   * the one the request was issued against (a swap mid-flight). */
  async forView<T extends Stamped>(
    view: ViewName,
    exec: (client: ApiClient, init: RequestInit) => Promise<T>,
  ): Promise<T | null> {
    this.inflight.get(view)?.abort();
    const controller = new AbortController();
    this.inflight.set(view, controller);
    const token = (this.seq.get(view) ?? 0) + 1;
    this.seq.set(view, token);

    const init: RequestInit = { signal: controller.signal };
    let meta: MetaPayload;
    let body: T;
    try {
      meta = await this.json<MetaPayload>("/meta", init);
      body = await exec(this, init);
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    }
    if (this.seq.get(view) !== token) return null;
    if (body.build_id !== meta.build_id) return null;
    return body;
  }
}
