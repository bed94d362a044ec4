/** Thin typed wrapper over the session service HTTP endpoints. */

import { ControlAction, ServiceError, SessionSummary } from "./types.js";

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<ResponseLike>;

export interface CreateSessionRequest {
  source_text: string;
  task_id?: string;
  budget?: Record<string, unknown>;
  negation_probe?: boolean;
  start_paused?: boolean;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string | null = null,
    private readonly fetchFn: FetchLike = fetch as unknown as FetchLike,
  ) {}

  headers(withBody = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    if (withBody) h["Content-Type"] = "application/json";
    return h;
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<unknown> {
    let resp: ResponseLike;
    try {
      resp = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: this.headers(body !== undefined),
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError("NETWORK", String(err), 0);
    }
    if (resp.ok) return resp.json();
    let code = `HTTP_${resp.status}`;
    let message = `request failed with status ${resp.status}`;
    try {
      const data = (await resp.json()) as {
        error?: { code?: string; message?: string };
      };
      if (data?.error?.code) {
        code = data.error.code;
        message = data.error.message ?? message;
      }
    } catch {
      // keep the generic code when the body is not the error shape
    }
    throw new ServiceError(code, message, resp.status);
  }

  async listSessions(): Promise<SessionSummary[]> {
    const data = (await this.request("GET", "/sessions")) as {
      sessions: SessionSummary[];
    };
    return data.sessions;
  }

  async getSession(sessionId: string): Promise<SessionSummary> {
    return (await this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}`,
    )) as SessionSummary;
  }

  async createSession(req: CreateSessionRequest): Promise<string> {
    const data = (await this.request("POST", "/sessions", req)) as {
      session_id: string;
    };
    return data.session_id;
  }

  async control(
    sessionId: string,
    action: ControlAction,
    text?: string,
  ): Promise<number> {
    const body: Record<string, unknown> = { action };
    if (text !== undefined) body.text = text;
    const data = (await this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/control`,
      body,
    )) as { applied_seq: number };
    return data.applied_seq;
  }

  async fileContent(sessionId: string): Promise<string> {
    const data = (await this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/file`,
    )) as { content: string };
    return data.content;
  }
}
