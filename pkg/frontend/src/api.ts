/**
 * Typed client for the registrar HTTP API.
 *
 * The portal performs no cryptography: every code and disposition it shows
 * is a byte-for-byte service response. The fetch function is injectable so
 * tests can replay recorded fixtures.
 */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface PortalConfig {
  baseUrl: string;
  token: string;
  fetchFn?: FetchLike;
}

export interface CodeResponse {
  voter_id: string;
  election_id: string;
  index: number;
  numeric20: string;
  words6: string;
}

export interface RegisterResponse {
  voter_id: string;
  secret: string;
  secret_version: number;
  voter_token: string;
}

export interface RotateResponse {
  voter_id: string;
  secret: string;
  secret_version: number;
}

export interface CheckRequest {
  voter_id: string;
  election_id: string;
  code_text: string;
}

export interface CheckResponse {
  envelope_id: string;
  status: string;
  matched_index: number | null;
  corrections: number;
  reason: string;
}

export interface BatchResponse {
  batchId: string;
  report: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchFn: FetchLike;

  constructor(config: PortalConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.token = config.token;
    this.fetchFn = config.fetchFn ?? ((url, init) => fetch(url, init));
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    return { Authorization: `Bearer ${this.token}`, ...extra };
  }

  private async requestJson<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      ...init,
      headers: this.headers((init.headers as Record<string, string>) ?? {}),
    });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  registerVoter(fields: { name: string; address: string; dob: string }): Promise<RegisterResponse> {
    return this.requestJson("/api/voters", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(fields),
    });
  }

  currentCode(voterId: string, electionId: string): Promise<CodeResponse> {
    return this.requestJson(
      `/api/voters/${encodeURIComponent(voterId)}/elections/${encodeURIComponent(electionId)}/code`,
    );
  }

  advance(voterId: string, electionId: string): Promise<CodeResponse> {
    return this.requestJson(
      `/api/voters/${encodeURIComponent(voterId)}/elections/${encodeURIComponent(electionId)}/advance`,
      { method: "POST" },
    );
  }

  rotate(voterId: string): Promise<RotateResponse> {
    return this.requestJson(`/api/voters/${encodeURIComponent(voterId)}/rotate`, {
      method: "POST",
    });
  }

  checkEnvelope(request: CheckRequest): Promise<CheckResponse> {
    return this.requestJson("/api/validate/envelope", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  async validateBatch(csvText: string): Promise<BatchResponse> {
    const response = await this.fetchFn(this.baseUrl + "/api/validate/batch", {
      method: "POST",
      headers: this.headers({ "Content-Type": "text/csv" }),
      body: csvText,
    });
    await raiseForStatus(response);
    return {
      batchId: response.headers.get("X-Batch-Id") ?? "",
      report: await response.text(),
    };
  }
}
