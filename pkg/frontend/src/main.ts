/** Browser entry point: connects the panes to a running service.
 *
 * Configuration is a base URL and a bearer token, kept in
 * localStorage. Everything shown is rebuilt from the event stream, so
 * a reload reconstructs the identical view from sequence zero.
 */

import { ServiceClient } from "./client.js";
import { SessionController, ViewState } from "./controller.js";
import {
  renderFeed,
  renderFileText,
  renderSessionList,
  renderVerdict,
} from "./view.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const baseInput = el<HTMLInputElement>("base-url");
const tokenInput = el<HTMLInputElement>("token");
const connectBtn = el<HTMLButtonElement>("connect");
const refreshBtn = el<HTMLButtonElement>("refresh");
const sessionList = el<HTMLElement>("session-list");
const bannerBox = el<HTMLElement>("banner");
const feedPane = el<HTMLElement>("feed");
const filePane = el<HTMLElement>("file");
const verdictPane = el<HTMLElement>("verdict");
const sessionTitle = el<HTMLElement>("session-title");
const phaseBadge = el<HTMLElement>("phase");
const streamDot = el<HTMLElement>("stream-dot");
const hintInput = el<HTMLTextAreaElement>("hint-text");
const hintBtn = el<HTMLButtonElement>("hint-send");
const pauseBtn = el<HTMLButtonElement>("pause");
const resumeBtn = el<HTMLButtonElement>("resume");
const abortBtn = el<HTMLButtonElement>("abort");

function stored(key: string): string {
  try {
    return localStorage.getItem(key) ?? "";
  } catch {
    return "";
  }
}

function store(key: string, value: string): void {
  try {
    localStorage.setItem(key, value);
  } catch {
    // private mode or blocked storage: config just does not persist
  }
}

baseInput.value = stored("collab-ui.base") || "http://127.0.0.1:8422";
tokenInput.value = stored("collab-ui.token");

let client: ServiceClient | null = null;
let controller: SessionController | null = null;

function setBanner(text: string | null): void {
  bannerBox.textContent = text ?? "";
  bannerBox.style.display = text ? "block" : "none";
}

function openDetailKeys(container: HTMLElement): Set<string> {
  const keys = new Set<string>();
  container.querySelectorAll("details[open]").forEach((d) => {
    const key = d.getAttribute("data-key");
    if (key) keys.add(key);
  });
  return keys;
}

function swapHtml(container: HTMLElement, html: string): void {
  const open = openDetailKeys(container);
  const pinned =
    container.scrollTop + container.clientHeight >= container.scrollHeight - 8;
  container.innerHTML = html;
  if (open.size > 0) {
    container.querySelectorAll("details").forEach((d) => {
      if (open.has(d.getAttribute("data-key") ?? "")) {
        d.setAttribute("open", "");
      }
    });
  }
  if (pinned) container.scrollTop = container.scrollHeight;
}

function renderState(state: ViewState): void {
  swapHtml(feedPane, renderFeed(state.rows));
  filePane.innerHTML = renderFileText(state.fileText);
  verdictPane.innerHTML = renderVerdict(state.verdict, state.outcome);
  phaseBadge.textContent = state.phase;
  streamDot.className = `dot ${state.streamState}`;
  streamDot.title = state.streamState;
  hintInput.disabled = !state.hintEnabled;
  hintBtn.disabled = !state.hintEnabled;
  hintBtn.textContent = state.hintEnabled ? "Send hint" : "Session over";
  setBanner(state.banner);
}

async function refreshSessions(): Promise<void> {
  if (!client) return;
  try {
    const sessions = await client.listSessions();
    sessionList.innerHTML = renderSessionList(sessions);
    setBanner(null);
  } catch (err) {
    sessionList.innerHTML = '<div class="empty">unreachable</div>';
    setBanner(String(err));
  }
}

async function openSession(sessionId: string): Promise<void> {
  if (!client) return;
  controller?.disconnect();
  sessionTitle.textContent = sessionId;
  feedPane.innerHTML = "";
  filePane.innerHTML = "";
  verdictPane.innerHTML = "";
  controller = new SessionController(client, sessionId, renderState);
  await controller.connect(0);
}

connectBtn.addEventListener("click", () => {
  const base = baseInput.value.trim().replace(/\/+$/, "");
  const token = tokenInput.value.trim();
  store("collab-ui.base", base);
  store("collab-ui.token", token);
  controller?.disconnect();
  controller = null;
  sessionTitle.textContent = "pick a session";
  client = new ServiceClient(base, token || null);
  void refreshSessions();
});

refreshBtn.addEventListener("click", () => void refreshSessions());

sessionList.addEventListener("click", (e) => {
  const target = (e.target as HTMLElement).closest("[data-session]");
  const sid = target?.getAttribute("data-session");
  if (sid) void openSession(sid);
});

hintBtn.addEventListener("click", async () => {
  if (!controller) return;
  const seq = await controller.sendHint(hintInput.value);
  if (seq !== null) hintInput.value = "";
});

pauseBtn.addEventListener("click", () => void controller?.control("PAUSE"));
resumeBtn.addEventListener("click", () => void controller?.control("RESUME"));
abortBtn.addEventListener("click", () => void controller?.control("ABORT"));

if (baseInput.value && tokenInput.value) {
  connectBtn.click();
}
