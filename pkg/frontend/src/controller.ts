/** Headless session view: everything the page shows, minus the DOM.
 *
 * All state is derived from the event stream, so reconnecting or
 * reloading from sequence zero reconstructs the identical view. The
 * only writes are control posts, which are fire-and-confirm.
 */

import { ServiceClient } from "./client.js";
import { EventFeed, FeedRow } from "./feed.js";
import { SessionStream, StreamOptions, StreamState } from "./stream.js";
import { ServiceError, WireEvent, WireVerdict } from "./types.js";

export interface ViewState {
  rows: FeedRow[];
  fileText: string;
  phase: string;
  verdict: WireVerdict | null;
  outcome: Record<string, unknown> | null;
  streamState: StreamState;
  banner: string | null;
  hintEnabled: boolean;
}

export class SessionController {
  readonly feed = new EventFeed();
  private fileText = "";
  private phase = "ASSIGNED";
  private verdict: WireVerdict | null = null;
  private outcome: Record<string, unknown> | null = null;
  private streamState: StreamState = "idle";
  private banner: string | null = null;
  private stream: SessionStream | null = null;

  constructor(
    private readonly client: ServiceClient,
    readonly sessionId: string,
    private readonly onChange: (state: ViewState) => void = () => {},
    private readonly streamOpts: StreamOptions = {},
  ) {}

  state(): ViewState {
    return {
      rows: this.feed.rows(),
      fileText: this.fileText,
      phase: this.phase,
      verdict: this.verdict,
      outcome: this.outcome,
      streamState: this.streamState,
      banner: this.banner,
      hintEnabled: this.outcome === null,
    };
  }

  /** Open the live stream; a finished session replays and ends. */
  async connect(from = 0): Promise<void> {
    try {
      await this.client.getSession(this.sessionId);
    } catch (err) {
      // Auth and unknown-session failures land in the banner, the
      // stream is not opened, and the page stays up.
      this.banner = describeError(err);
      this.emit();
      return;
    }
    this.banner = null;
    this.stream = new SessionStream(
      this.client.baseUrl,
      this.sessionId,
      this.client.token,
      (ev) => this.handleEvent(ev),
      (state) => {
        this.streamState = state;
        this.emit();
      },
      this.streamOpts,
    );
    this.stream.start(from);
  }

  disconnect(): void {
    this.stream?.close();
    this.stream = null;
  }

  async sendHint(text: string): Promise<number | null> {
    const trimmed = text.trim();
    if (trimmed === "") {
      this.banner = "a hint needs nonempty text";
      this.emit();
      return null;
    }
    try {
      const seq = await this.client.control(this.sessionId, "HINT", trimmed);
      // The HINT event may have streamed back before the ack; pin the
      // optimistic row only while it has not, so it renders once.
      if (!this.feed.hasHintEvent(trimmed)) this.feed.pinHint(trimmed);
      this.banner = null;
      this.emit();
      return seq;
    } catch (err) {
      this.banner = describeError(err);
      this.emit();
      return null;
    }
  }

  async control(action: "PAUSE" | "RESUME" | "ABORT"): Promise<number | null> {
    try {
      const seq = await this.client.control(this.sessionId, action);
      this.banner = null;
      this.emit();
      return seq;
    } catch (err) {
      this.banner = describeError(err);
      this.emit();
      return null;
    }
  }

  private handleEvent(ev: WireEvent): void {
    this.feed.apply(ev);
    if (ev.kind === "FILE_SNAPSHOT") {
      // Track the proof file itself; probe forks write negation.lean
      // and those snapshots must not clobber the pane.
      const p = ev.payload as { path?: unknown; content?: unknown };
      if (p.path === "task.lean" && typeof p.content === "string") {
        this.fileText = p.content;
      }
    } else if (ev.kind === "PHASE_CHANGE") {
      const to = (ev.payload as { to?: unknown }).to;
      if (typeof to === "string") this.phase = to;
    } else if (ev.kind === "VERDICT") {
      const v = (ev.payload as { verdict?: unknown }).verdict;
      if (v && typeof v === "object") this.verdict = v as WireVerdict;
    } else if (ev.kind === "OUTCOME") {
      const o = (ev.payload as { outcome?: unknown }).outcome;
      this.outcome = o && typeof o === "object" ? (o as Record<string, unknown>) : {};
      const fv = this.outcome["final_verdict"];
      if (fv && typeof fv === "object") this.verdict = fv as WireVerdict;
    }
    this.emit();
  }

  private emit(): void {
    this.onChange(this.state());
  }
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError) return `${err.code}: ${err.message}`;
  return String(err);
}
