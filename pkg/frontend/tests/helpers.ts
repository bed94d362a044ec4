import { EventKind, WireEvent } from "../src/types.js";

export function mkEv(
  seq: number,
  kind: EventKind,
  payload: Record<string, unknown> = {},
): WireEvent {
  return { session_id: "s1", seq, ts: "2026-01-01T00:00:00+00:00", kind, payload };
}

/** Emit one event as the three SSE lines the service writes. */
export function sseLines(ev: WireEvent): string[] {
  return [`id: ${ev.seq}`, `data: ${JSON.stringify(ev)}`, ""];
}
