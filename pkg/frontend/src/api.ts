import type {
  CorrectionRequest,
  ItemDetail,
  QueuePage,
  SubmitResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the HTTP status so callers can branch on 404/409. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ReviewApi {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  queue(offset = 0, limit = 20): Promise<QueuePage> {
    return this.request<QueuePage>(
      `/api/queue?offset=${offset}&limit=${limit}`,
    );
  }

  async item(id: string): Promise<ItemDetail> {
    const payload = await this.request<{ item: ItemDetail }>(
      `/api/items/${encodeURIComponent(id)}`,
    );
    return payload.item;
  }

  submitCorrections(id: string, body: CorrectionRequest): Promise<SubmitResponse> {
    return this.request<SubmitResponse>(
      `/api/items/${encodeURIComponent(id)}/corrections`,
      { method: "POST", body: JSON.stringify(body) },
    );
  }

  accept(id: string, reviewer: string): Promise<{ status: string }> {
    return this.request<{ status: string }>(
      `/api/items/${encodeURIComponent(id)}/accept`,
      { method: "POST", body: JSON.stringify({ reviewer }) },
    );
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      ...init,
      headers: { "Content-Type": "application/json", ...(init?.headers ?? {}) },
    });
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const message =
        payload && typeof payload === "object" && "error" in payload
          ? String((payload as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return payload as T;
  }
}
