"""Minimal MCP client: JSON-RPC 2.0 over a child process's stdio.

Messages are newline-delimited JSON objects.  One request is in flight
at a time per handle; a background thread drains stdout so timeouts can
be enforced without losing responses.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import (
    CallTimeout,
    HandshakeTimeout,
    ProtocolMismatch,
    ServerDied,
    SpawnFailed,
)

PROTOCOL_VERSION = "2024-11-05"
CLIENT_INFO = {"name": "proofloop", "version": "0.1.0"}

DEFAULT_HANDSHAKE_TIMEOUT = 10.0
DEFAULT_CALL_TIMEOUT = 120.0


@dataclass
class ServerHandle:
    """One spawned tool server: process, advertised tools, liveness."""

    command: tuple[str, ...]
    process: subprocess.Popen
    protocol_version: str
    server_info: dict[str, Any]
    tools: list[dict[str, Any]]
    call_timeout: float
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _responses: "queue.Queue[Optional[dict]]" = field(
        default_factory=queue.Queue, repr=False
    )
    _next_id: int = 1
    failed: bool = False

    @property
    def alive(self) -> bool:
        return not self.failed and self.process.poll() is None

    def tool_names(self) -> list[str]:
        return [t.get("name", "") for t in self.tools]

    # -- wire helpers -------------------------------------------------

    def _send(self, message: dict[str, Any]) -> None:
        try:
            line = json.dumps(message, ensure_ascii=False) + "\n"
            assert self.process.stdin is not None
            self.process.stdin.write(line.encode("utf-8"))
            self.process.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as e:
            self.failed = True
            raise ServerDied(f"cannot write to tool server: {e}") from e

    def request(
        self, method: str, params: dict[str, Any], timeout: float
    ) -> dict[str, Any]:
        """Send one request and wait for its response.

        Serialized per handle; notifications arriving in between are
        discarded.  Raises CallTimeout when the deadline passes and
        ServerDied when stdout closes first.
        """
        with self._lock:
            msg_id = self._next_id
            self._next_id += 1
            self._send(
                {"jsonrpc": "2.0", "id": msg_id, "method": method, "params": params}
            )
            while True:
                try:
                    item = self._responses.get(timeout=timeout)
                except queue.Empty:
                    raise CallTimeout(
                        f"no response to {method} within {timeout:.0f}s"
                    ) from None
                if item is None:
                    self.failed = True
                    raise ServerDied("tool server closed its output stream")
                if item.get("id") != msg_id:
                    continue  # stray notification or stale response
                if "error" in item:
                    return item
                return item

    def notify(self, method: str, params: dict[str, Any]) -> None:
        self._send({"jsonrpc": "2.0", "method": method, "params": params})

    def close(self) -> None:
        self.failed = True
        proc = self.process
        for stream in (proc.stdin,):
            try:
                if stream:
                    stream.close()
            except OSError:
                pass
        try:
            proc.terminate()
            proc.wait(timeout=2)
        except (OSError, subprocess.TimeoutExpired):
            try:
                proc.kill()
            except OSError:
                pass


def _reader(handle: ServerHandle) -> None:
    proc = handle.process
    assert proc.stdout is not None
    for raw in proc.stdout:
        try:
            msg = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            continue
        if isinstance(msg, dict) and "id" in msg:
            handle._responses.put(msg)
        # Server-initiated notifications are ignored.
    handle._responses.put(None)


def spawn_server(
    command: list[str] | tuple[str, ...],
    cwd: Optional[str] = None,
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
    call_timeout: float = DEFAULT_CALL_TIMEOUT,
) -> ServerHandle:
    """Start a tool server and complete the initialization handshake.

    Raises SpawnFailed when the process cannot start, HandshakeTimeout
    when it does not answer initialize in time, and ProtocolMismatch
    when it speaks a different protocol generation.
    """
    try:
        proc = subprocess.Popen(
            list(command),
            cwd=cwd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
    except (OSError, ValueError) as e:
        raise SpawnFailed(f"cannot start {command!r}: {e}") from e

    handle = ServerHandle(
        command=tuple(command),
        process=proc,
        protocol_version="",
        server_info={},
        tools=[],
        call_timeout=call_timeout,
    )
    threading.Thread(target=_reader, args=(handle,), daemon=True).start()

    try:
        reply = handle.request(
            "initialize",
            {
                "protocolVersion": PROTOCOL_VERSION,
                "clientInfo": CLIENT_INFO,
                "capabilities": {"tools": {}},
            },
            timeout=handshake_timeout,
        )
    except CallTimeout as e:
        handle.close()
        raise HandshakeTimeout(str(e)) from e
    except ServerDied as e:
        handle.close()
        raise SpawnFailed(f"tool server exited during handshake: {e}") from e

    if "error" in reply:
        handle.close()
        raise ProtocolMismatch(f"initialize rejected: {reply['error']}")
    result = reply.get("result") or {}
    version = str(result.get("protocolVersion", ""))
    if not version.startswith("2024-") and not version.startswith("2025-"):
        handle.close()
        raise ProtocolMismatch(f"unsupported protocol version {version!r}")
    handle.protocol_version = version
    handle.server_info = result.get("serverInfo", {}) or {}

    try:
        handle.notify("notifications/initialized", {})
        tools_reply = handle.request("tools/list", {}, timeout=handshake_timeout)
    except CallTimeout as e:
        handle.close()
        raise HandshakeTimeout(str(e)) from e
    except ServerDied as e:
        handle.close()
        raise SpawnFailed(f"tool server exited during tools/list: {e}") from e
    if "error" in tools_reply:
        handle.close()
        raise ProtocolMismatch(f"tools/list rejected: {tools_reply['error']}")
    handle.tools = list((tools_reply.get("result") or {}).get("tools", []))
    return handle


@dataclass(frozen=True)
class WireCallOutcome:
    """Result of one tools/call exchange, before any domain parsing."""

    success: bool
    text: str
    structured: Any
    error: str = ""


def call_tool_wire(
    handle: ServerHandle, name: str, arguments: dict[str, Any], timeout: float
) -> WireCallOutcome:
    """Invoke one tool over the wire and flatten the MCP result shape.

    JSON-RPC level errors come back as failed outcomes; transport-level
    failures (timeout, dead process) raise.
    """
    if not handle.alive:
        raise ServerDied("tool server process is gone")
    reply = handle.request(
        "tools/call", {"name": name, "arguments": arguments}, timeout=timeout
    )
    if "error" in reply:
        err = reply["error"]
        msg = err.get("message", str(err)) if isinstance(err, dict) else str(err)
        return WireCallOutcome(False, msg, None, error=msg)
    result = reply.get("result") or {}
    parts = []
    for item in result.get("content", []) or []:
        if isinstance(item, dict) and item.get("type") == "text":
            parts.append(str(item.get("text", "")))
    text = "\n".join(parts)
    structured = result.get("structuredContent")
    if structured is None and text:
        try:
            structured = json.loads(text)
        except json.JSONDecodeError:
            structured = None
    if result.get("isError"):
        return WireCallOutcome(False, text, structured, error=text or "tool error")
    return WireCallOutcome(True, text, structured)
