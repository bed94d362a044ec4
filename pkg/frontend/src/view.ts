/** Pure HTML renderers for the dashboard panes.
 *
 * Every function maps state to a markup string and touches nothing
 * else, so the panes can be asserted on directly in tests and the DOM
 * layer stays a thin innerHTML swap.
 */

import { FeedRow } from "./feed.js";
import { findMarkers } from "./markers.js";
import { SessionSummary, WireEvent, WireVerdict } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function asString(value: unknown, fallback = ""): string {
  return typeof value === "string" ? value : fallback;
}

function snippet(text: string, limit = 100): string {
  const flat = text.replace(/\s+/g, " ").trim();
  return flat.length > limit ? flat.slice(0, limit) + "..." : flat;
}

/** One-line label for an event, shown next to its kind tag. */
export function eventSummary(ev: WireEvent): string {
  const p = ev.payload;
  switch (ev.kind) {
    case "LLM_REQUEST": {
      const messages = Array.isArray(p.messages) ? p.messages.length : 0;
      return `${messages} messages to the model`;
    }
    case "LLM_RESPONSE": {
      const msg = (p.message ?? {}) as Record<string, unknown>;
      const calls = Array.isArray(msg.tool_calls) ? msg.tool_calls.length : 0;
      const content = asString(msg.content);
      if (content) return snippet(content);
      return calls > 0 ? `${calls} tool calls requested` : "empty reply";
    }
    case "TOOL_CALL":
      return `${asString(p.tool, "?")} [${asString(p.call_id, "?")}]`;
    case "TOOL_RESULT": {
      const status = p.success ? "ok" : "failed";
      return `${asString(p.tool, "?")} ${status}`;
    }
    case "FILE_SNAPSHOT":
      return `${asString(p.path, "?")} (${asString(p.op, "write")})`;
    case "PHASE_CHANGE":
      return `${asString(p.from, "?")} to ${asString(p.to, "?")}`;
    case "FEEDBACK": {
      const summary = asString(p.summary);
      if (summary) return snippet(summary);
      return `${asString(p.origin, "verifier")}: ${asString(p.status, "")}`;
    }
    case "HINT":
      return snippet(asString(p.text));
    case "VERDICT": {
      const v = (p.verdict ?? {}) as Record<string, unknown>;
      if (v.verified) return "verified";
      const reasons = Array.isArray(v.reasons) ? v.reasons : [];
      return reasons.join(", ") || "not verified";
    }
    case "OUTCOME": {
      const o = (p.outcome ?? {}) as Record<string, unknown>;
      return asString(o.status, "done");
    }
    default:
      return "";
  }
}

const COLLAPSED_KINDS = new Set([
  "LLM_REQUEST",
  "LLM_RESPONSE",
  "TOOL_CALL",
  "TOOL_RESULT",
  "FILE_SNAPSHOT",
  "FEEDBACK",
]);

export function renderFeedRow(row: FeedRow): string {
  const kindClass = `k-${row.kind.toLowerCase()}`;
  const badge = row.pending
    ? '<span class="seq pending">...</span>'
    : `<span class="seq">#${row.seq}</span>`;
  const tag = `<span class="kind ${kindClass}">${escapeHtml(row.kind)}</span>`;
  if (row.pending) {
    const text = escapeHtml(row.hintText ?? "");
    return (
      `<div class="row pending" data-key="${escapeHtml(row.key)}">` +
      `${badge}${tag}<span class="body">${text}</span></div>`
    );
  }
  const ev = row.event as WireEvent;
  const label = escapeHtml(eventSummary(ev));
  let body: string;
  if (COLLAPSED_KINDS.has(row.kind)) {
    const payload = escapeHtml(JSON.stringify(ev.payload, null, 2));
    body =
      `<details data-key="${escapeHtml(row.key)}">` +
      `<summary>${label}</summary>` +
      `<pre class="payload">${payload}</pre></details>`;
  } else {
    body = `<span class="body">${label}</span>`;
  }
  return (
    `<div class="row ${kindClass}" data-key="${escapeHtml(row.key)}">` +
    `${badge}${tag}${body}</div>`
  );
}

export function renderFeed(rows: FeedRow[]): string {
  if (rows.length === 0) {
    return '<div class="empty">no events yet</div>';
  }
  return rows.map(renderFeedRow).join("\n");
}

/** Numbered source listing with every incompleteness marker wrapped in
 * a mark tag. Highlight positions come from the same scan the backend
 * runs, so what lights up here is exactly what the verifier counts. */
export function renderFileText(text: string): string {
  if (text === "") return '<div class="empty">no file yet</div>';
  const hits = findMarkers(text);
  const lines = text.split("\n");
  if (lines.length > 1 && lines[lines.length - 1] === "") lines.pop();
  const out: string[] = [];
  let offset = 0;
  let h = 0;
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    const lineEnd = offset + line.length;
    let html = "";
    let cursor = offset;
    while (h < hits.length && hits[h].offset < lineEnd) {
      const hit = hits[h];
      html += escapeHtml(text.slice(cursor, hit.offset));
      html +=
        `<mark data-line="${hit.line}" data-col="${hit.col}">` +
        escapeHtml(hit.token) +
        "</mark>";
      cursor = hit.offset + hit.token.length;
      h += 1;
    }
    html += escapeHtml(text.slice(cursor, lineEnd));
    out.push(
      `<div class="srcline"><span class="lno">${i + 1}</span>` +
        `<span class="code">${html}</span></div>`,
    );
    offset = lineEnd + 1;
  }
  return out.join("\n");
}

export function renderVerdict(
  verdict: WireVerdict | null,
  outcome: Record<string, unknown> | null,
): string {
  const parts: string[] = [];
  if (outcome !== null) {
    const status = asString(outcome.status, "done");
    const ok = status === "VERIFIED";
    parts.push(
      `<div class="outcome ${ok ? "good" : "bad"}">` +
        `<span class="status">${escapeHtml(status)}</span></div>`,
    );
    const note = asString(outcome.note);
    if (note) parts.push(`<div class="note">${escapeHtml(note)}</div>`);
  }
  if (verdict === null) {
    if (parts.length === 0) return '<div class="empty">no verdict yet</div>';
    return parts.join("\n");
  }
  const flag = verdict.verified
    ? '<div class="flag good">verified</div>'
    : '<div class="flag bad">not verified</div>';
  parts.push(flag);
  const reasons = (verdict.reasons ?? [])
    .map((r) => `<li>${escapeHtml(r)}</li>`)
    .join("");
  parts.push(`<ul class="reasons">${reasons}</ul>`);
  const diags = verdict.diagnostics ?? [];
  if (diags.length > 0) {
    const items = diags
      .map((d) => {
        const sev = asString(d.severity, "info");
        const msg = asString(d.message);
        return `<li class="diag ${escapeHtml(sev)}">${escapeHtml(snippet(msg, 200))}</li>`;
      })
      .join("");
    parts.push(`<ul class="diags">${items}</ul>`);
  }
  return parts.join("\n");
}

export function renderSessionList(sessions: SessionSummary[]): string {
  if (sessions.length === 0) {
    return '<div class="empty">no sessions</div>';
  }
  return sessions
    .map((s) => {
      const cls = s.finished ? "done" : s.paused ? "paused" : "live";
      return (
        `<div class="sess ${cls}" data-session="${escapeHtml(s.session_id)}">` +
        `<span class="sid">${escapeHtml(s.session_id)}</span>` +
        `<span class="stat">${escapeHtml(s.status)}</span>` +
        `<span class="ph">${escapeHtml(s.phase)}</span>` +
        `<span class="meta">${s.rounds_used}r ${s.api_calls_used}c</span></div>`
      );
    })
    .join("\n");
}
