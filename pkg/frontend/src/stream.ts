/** Resumable consumption of a session's server-sent event stream.
 *
 * The native EventSource cannot send an Authorization header, so the
 * stream is read over fetch instead. Reconnection is explicit: after a
 * drop, the next request asks the server for events from the first
 * sequence number this client has not seen, which makes duplicates and
 * gaps structurally impossible regardless of what the network does.
 */

import { WireEvent } from "./types.js";

export interface StreamHandle {
  cancel(): void;
}

export type Transport = (
  url: string,
  headers: Record<string, string>,
  onLine: (line: string) => void,
  onDone: (err?: unknown) => void,
) => StreamHandle;

/** Line-oriented reader over fetch with streaming response bodies. */
export function fetchTransport(fetchFn?: typeof fetch): Transport {
  const doFetch = fetchFn ?? fetch;
  return (url, headers, onLine, onDone) => {
    const controller = new AbortController();
    (async () => {
      const resp = await doFetch(url, { headers, signal: controller.signal });
      if (!resp.ok || !resp.body) {
        throw new Error(`stream request failed with status ${resp.status}`);
      }
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        for (;;) {
          const nl = buffer.indexOf("\n");
          if (nl < 0) break;
          onLine(buffer.slice(0, nl).replace(/\r$/, ""));
          buffer = buffer.slice(nl + 1);
        }
      }
      if (buffer !== "") onLine(buffer);
    })().then(
      () => onDone(),
      (err) => onDone(err),
    );
    return { cancel: () => controller.abort() };
  };
}

export type StreamState = "idle" | "open" | "retrying" | "ended";

export interface StreamOptions {
  transport?: Transport;
  schedule?: (fn: () => void, ms: number) => void;
  reconnectDelayMs?: number;
}

export class SessionStream {
  private readonly transport: Transport;
  private readonly schedule: (fn: () => void, ms: number) => void;
  private readonly delayMs: number;
  private handle: StreamHandle | null = null;
  private nextFrom = 0;
  private closed = false;
  private sawOutcome = false;
  private pendingData: string[] = [];
  reconnects = 0;

  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    private readonly token: string | null,
    private readonly onEvent: (ev: WireEvent) => void,
    private readonly onState: (state: StreamState) => void = () => {},
    opts: StreamOptions = {},
  ) {
    this.transport = opts.transport ?? fetchTransport();
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.delayMs = opts.reconnectDelayMs ?? 1500;
  }

  start(from = 0): void {
    this.nextFrom = from;
    this.open();
  }

  close(): void {
    this.closed = true;
    this.handle?.cancel();
    this.handle = null;
  }

  get finished(): boolean {
    return this.sawOutcome;
  }

  private open(): void {
    const url =
      `${this.baseUrl}/sessions/${encodeURIComponent(this.sessionId)}` +
      `/events?from=${this.nextFrom}`;
    const headers: Record<string, string> = { Accept: "text/event-stream" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    this.pendingData = [];
    this.onState("open");
    // A transport may finish synchronously while replaying a finished
    // session, so the state callback runs first and the handle is only
    // kept while the connection is still live.
    const handle = this.transport(
      url,
      headers,
      (line) => this.onLine(line),
      (err) => this.onConnectionDone(err),
    );
    if (!this.closed) this.handle = handle;
  }

  private onLine(line: string): void {
    if (line === "") {
      this.dispatch();
      return;
    }
    if (line.startsWith("id:")) {
      // informational; the seq inside the JSON payload is what counts
      return;
    }
    if (line.startsWith("data:")) {
      this.pendingData.push(line.slice(5).replace(/^ /, ""));
      return;
    }
    // comment or unknown field, ignored per the SSE format
  }

  private dispatch(): void {
    if (this.pendingData.length === 0) return;
    const raw = this.pendingData.join("\n");
    this.pendingData = [];
    let ev: WireEvent;
    try {
      ev = JSON.parse(raw) as WireEvent;
    } catch {
      return;
    }
    if (typeof ev.seq !== "number") return;
    if (ev.seq < this.nextFrom) return; // replayed overlap after resume
    this.nextFrom = ev.seq + 1;
    if (ev.kind === "OUTCOME") this.sawOutcome = true;
    this.onEvent(ev);
  }

  private onConnectionDone(_err?: unknown): void {
    this.handle = null;
    if (this.closed) return;
    if (this.sawOutcome) {
      this.closed = true;
      this.onState("ended");
      return;
    }
    this.reconnects += 1;
    this.onState("retrying");
    this.schedule(() => {
      if (!this.closed) this.open();
    }, this.delayMs);
  }
}
