/** Ordered event store behind the feed pane.
 *
 * Events are keyed by sequence number, so replays after a reconnect
 * cannot duplicate a row and rows always render in transcript order.
 * Hints the operator just sent are pinned optimistically and replaced
 * by the real HINT event when it streams back.
 */

import { WireEvent } from "./types.js";

export interface FeedRow {
  key: string;
  seq: number | null;
  kind: string;
  pending: boolean;
  event: WireEvent | null;
  hintText: string | null;
}

function hintText(ev: WireEvent): string {
  const text = (ev.payload as { text?: unknown }).text;
  return typeof text === "string" ? text : "";
}

export class EventFeed {
  private readonly events = new Map<number, WireEvent>();
  private optimistic: { key: string; text: string }[] = [];
  private counter = 0;

  apply(ev: WireEvent): void {
    if (this.events.has(ev.seq)) return;
    this.events.set(ev.seq, ev);
    if (ev.kind === "HINT") {
      const text = hintText(ev);
      const i = this.optimistic.findIndex((o) => o.text === text);
      if (i >= 0) this.optimistic.splice(i, 1);
    }
  }

  /** Show a just-sent hint before its event arrives; returns the row key. */
  pinHint(text: string): string {
    this.counter += 1;
    const key = `pin-${this.counter}`;
    this.optimistic.push({ key, text });
    return key;
  }

  hasHintEvent(text: string): boolean {
    for (const ev of this.events.values()) {
      if (ev.kind === "HINT" && hintText(ev) === text) return true;
    }
    return false;
  }

  rows(): FeedRow[] {
    const ordered = [...this.events.values()].sort((a, b) => a.seq - b.seq);
    const rows: FeedRow[] = ordered.map((ev) => ({
      key: `ev-${ev.seq}`,
      seq: ev.seq,
      kind: ev.kind,
      pending: false,
      event: ev,
      hintText: ev.kind === "HINT" ? hintText(ev) : null,
    }));
    for (const o of this.optimistic) {
      rows.push({
        key: o.key,
        seq: null,
        kind: "HINT",
        pending: true,
        event: null,
        hintText: o.text,
      });
    }
    return rows;
  }

  seqs(): number[] {
    return [...this.events.keys()].sort((a, b) => a - b);
  }

  get lastSeq(): number {
    let last = -1;
    for (const seq of this.events.keys()) if (seq > last) last = seq;
    return last;
  }

  get size(): number {
    return this.events.size;
  }
}
