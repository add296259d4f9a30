import type {
  CandidateListing,
  FilterMode,
  Leg,
  MatchdayRow,
  RecommendResponse,
  ServiceStatus,
  SessionView,
  SolverParams,
  Violation,
  WhatifResponse,
} from "./types.js";

/** fetch-compatible transport; injectable so tests can stub the service. */
export type Fetcher = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Error raised for any non-2xx response or transport failure.
 * status 0 means the service was unreachable; 422 carries the parsed
 * constraint violations.
 */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly violations: Violation[] = [],
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

interface ViolationBody {
  violations: Violation[];
}

function parseDetail(status: number, body: unknown): ApiError {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") {
      return new ApiError(status, detail);
    }
    if (detail && typeof detail === "object" && "violations" in detail) {
      const violations = (detail as ViolationBody).violations;
      const first = violations[0];
      return new ApiError(status, first ? first.constraint : "constraint violation", violations);
    }
  }
  return new ApiError(status, `request failed with status ${status}`);
}

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetcher: Fetcher = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetcher(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new ApiError(0, "service unreachable");
    }
    if (!response.ok) {
      let parsed: unknown = null;
      try {
        parsed = await response.json();
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      throw parseDetail(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  status(): Promise<ServiceStatus> {
    return this.request("GET", "/");
  }

  load(paths: string[]): Promise<{ matchdays: number; fixtures: number; candidates: number }> {
    return this.request("POST", "/load", { paths });
  }

  matchdays(): Promise<MatchdayRow[]> {
    return this.request("GET", "/matchdays");
  }

  candidates(matchday: number, filter: FilterMode = "intra"): Promise<CandidateListing> {
    return this.request("GET", `/matchdays/${matchday}/candidates?filter=${filter}`);
  }

  recommend(matchday: number, params?: SolverParams): Promise<RecommendResponse> {
    return this.request("POST", "/recommend", { matchday, params });
  }

  whatif(legs: Leg[], bankroll?: string): Promise<WhatifResponse> {
    const body: { legs: Leg[]; bankroll?: string } = { legs };
    if (bankroll !== undefined) {
      body.bankroll = bankroll;
    }
    return this.request("POST", "/whatif", body);
  }

  createSession(bankroll?: string): Promise<SessionView> {
    return this.request("POST", "/sessions", bankroll === undefined ? {} : { bankroll });
  }

  session(token: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${token}`);
  }

  recordWager(token: string, matchday: number, legs: Leg[], amount: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${token}/wagers`, { matchday, legs, amount });
  }
}
