import type { Period } from "./period";
import type {
  ApiErrorBody,
  CdfPoint,
  ContentDetails,
  LoginResponse,
  MediaKind,
  RankedEntry,
  WeekPoint,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type Fetch = typeof fetch;

/**
 * Thin typed client over the monitor API. Every call except login requires
 * a token from a prior login; calling earlier is a programming error and
 * throws locally instead of sending an unauthenticated request.
 */
export class ApiClient {
  private token: string | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: Fetch = fetch,
  ) {}

  hasSession(): boolean {
    return this.token !== null;
  }

  async login(username: string, password: string): Promise<LoginResponse> {
    const res = await this.fetchImpl(this.baseUrl + "/api/login", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ username, password }),
    });
    const body = await this.decode<LoginResponse>(res);
    this.token = body.token;
    return body;
  }

  async top(period: Period, kind: MediaKind, limit: number): Promise<RankedEntry[]> {
    const query = new URLSearchParams({
      from: period.from,
      to: period.to,
      kind,
      limit: String(limit),
    });
    return this.get<RankedEntry[]>("/api/top?" + query.toString());
  }

  async content(clusterId: string, period?: Period): Promise<ContentDetails> {
    let path = "/api/content/" + encodeURIComponent(clusterId);
    if (period) {
      path += "?" + new URLSearchParams({ from: period.from, to: period.to }).toString();
    }
    return this.get<ContentDetails>(path);
  }

  /** Absolute URL for a blob path such as `/api/media/<checksum>`. */
  mediaUrl(relative: string): string {
    return this.baseUrl + relative;
  }

  async membersCdf(kind?: "group" | "channel"): Promise<CdfPoint[]> {
    const suffix = kind ? "?kind=" + kind : "";
    return this.get<CdfPoint[]>("/api/stats/members_cdf" + suffix);
  }

  async weeklyVolume(): Promise<WeekPoint[]> {
    return this.get<WeekPoint[]>("/api/stats/weekly_volume");
  }

  async fetchMedia(relative: string): Promise<Blob> {
    const res = await this.fetchImpl(this.mediaUrl(relative), {
      headers: this.authHeaders(),
    });
    if (!res.ok) {
      throw new ApiError(res.status, "not_found", "media fetch failed");
    }
    return res.blob();
  }

  private authHeaders(): Record<string, string> {
    if (this.token === null) {
      throw new ApiError(0, "no_session", "login before calling the API");
    }
    return { Authorization: "Bearer " + this.token };
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      headers: this.authHeaders(),
    });
    return this.decode<T>(res);
  }

  private async decode<T>(res: Response): Promise<T> {
    if (!res.ok) {
      let body: ApiErrorBody = { code: "error", message: res.statusText };
      try {
        body = (await res.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (res.status === 401) this.token = null;
      throw new ApiError(res.status, body.code, body.message);
    }
    return (await res.json()) as T;
  }
}
