"""Session-facing tool gateway.

One gateway serves one proving session.  It owns the sandbox, the Lean
tool server handle (with respawn supervision), and the transcript hooks:
every call produces a TOOL_CALL/TOOL_RESULT event pair, and filesystem
mutations additionally produce FILE_SNAPSHOT events.

Agent-level failures (unknown tool, sandbox escape, ambiguous edit,
server-side tool errors, call timeouts) come back as failed records so
the calling agent can read the error and adapt.  Infrastructure failures
escalate: a dead server is respawned at most twice per session, then
ToolchainUnavailable aborts the session.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from ..model import Diagnostic
from ..transcript import EventKind, Transcript
from .diagnostics import parse_diagnostics
from .errors import (
    GatewayError,
    ServerDied,
    ToolchainUnavailable,
    ToolRejected,
    UnknownTool,
    UnparseablePayload,
)
from .fstools import FsResult, Sandbox, fs_tool
from .mcp import (
    DEFAULT_CALL_TIMEOUT,
    DEFAULT_HANDSHAKE_TIMEOUT,
    ServerHandle,
    call_tool_wire,
    spawn_server,
)
from .registry import (
    FILESYSTEM_TOOL_NAMES,
    LEAN_TOOL_NAMES,
    ToolDescriptor,
    build_registry,
)

MAX_RESPAWNS = 2


@dataclass(frozen=True)
class ToolCallRecord:
    """One completed tool invocation, as seen by the agent."""

    call_id: str
    tool: str
    args: dict[str, Any]
    success: bool
    result_text: str
    structured: Any = None
    diagnostics: Optional[tuple[Diagnostic, ...]] = None
    parse_error: str = ""
    error_code: str = ""
    started: float = 0.0
    finished: float = 0.0


class ToolGateway:
    def __init__(
        self,
        sandbox_root: Path | str,
        server_command: Optional[list[str]] = None,
        transcript: Optional[Transcript] = None,
        call_timeout: float = DEFAULT_CALL_TIMEOUT,
        handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.sandbox = Sandbox(sandbox_root)
        self.registry: dict[str, ToolDescriptor] = build_registry()
        self.transcript = transcript
        self.call_timeout = call_timeout
        self.handshake_timeout = handshake_timeout
        self.server_command = list(server_command) if server_command else None
        self.respawns_used = 0
        self.calls_made = 0
        self._clock = clock
        self._call_counter = 0
        self._handle: Optional[ServerHandle] = None
        if self.server_command:
            self._handle = self._spawn()

    # -- lifecycle ----------------------------------------------------

    def _spawn(self) -> ServerHandle:
        assert self.server_command is not None
        return spawn_server(
            self.server_command,
            cwd=str(self.sandbox.root),
            handshake_timeout=self.handshake_timeout,
            call_timeout=self.call_timeout,
        )

    def _respawn(self) -> None:
        if self.respawns_used >= MAX_RESPAWNS:
            raise ToolchainUnavailable(
                f"tool server died more than {MAX_RESPAWNS} times this session"
            )
        self.respawns_used += 1
        if self._handle is not None:
            self._handle.close()
        self._handle = self._spawn()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    # -- metadata -----------------------------------------------------

    def tool_descriptors(self) -> list[ToolDescriptor]:
        return list(self.registry.values())

    def read_text(self, rel_path: str) -> str:
        """Direct sandboxed read used by the session loop itself.

        Not a tool call: nothing is logged and nothing counts against
        usage statistics.
        """
        path = self.sandbox.resolve(rel_path)
        return path.read_text(encoding="utf-8")

    def write_text(self, rel_path: str, content: str, op: str = "setup") -> None:
        """Direct sandboxed write for session bookkeeping, snapshot logged."""
        path = self.sandbox.resolve(rel_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        self._log(
            EventKind.FILE_SNAPSHOT,
            {"path": self.sandbox.relative(path), "op": op, "content": content},
        )

    def sibling(self, transcript: Optional[Transcript]) -> "ToolGateway":
        """A fresh gateway over the same sandbox for a forked sub-session.

        The fork gets its own server process, call-id counter, and
        transcript so its event stream stands alone.
        """
        return ToolGateway(
            self.sandbox.root,
            self.server_command,
            transcript,
            call_timeout=self.call_timeout,
            handshake_timeout=self.handshake_timeout,
            clock=self._clock,
        )

    # -- dispatch -----------------------------------------------------

    def _log(self, kind: EventKind, payload: dict[str, Any]) -> None:
        if self.transcript is not None:
            self.transcript.append(kind, payload)

    def _next_call_id(self) -> str:
        self._call_counter += 1
        return f"t{self._call_counter}"

    def call(
        self, name: str, args: dict[str, Any], call_id: Optional[str] = None
    ) -> ToolCallRecord:
        """Invoke one tool by registry name and log the exchange."""
        cid = call_id or self._next_call_id()
        started = self._clock()
        self._log(
            EventKind.TOOL_CALL, {"call_id": cid, "tool": name, "args": args}
        )
        self.calls_made += 1
        try:
            if name in FILESYSTEM_TOOL_NAMES:
                record = self._call_fs(cid, name, args, started)
            elif name in LEAN_TOOL_NAMES:
                record = self._call_lean(cid, name, args, started)
            else:
                raise UnknownTool(f"tool {name!r} is not in the registry")
        except ToolRejected as e:
            record = ToolCallRecord(
                call_id=cid,
                tool=name,
                args=args,
                success=False,
                result_text=str(e),
                error_code=e.code,
                started=started,
                finished=self._clock(),
            )
        except GatewayError as e:
            # Infrastructure failure: close the event pair, then escalate.
            self._log(
                EventKind.TOOL_RESULT,
                {
                    "call_id": cid,
                    "tool": name,
                    "success": False,
                    "result": str(e),
                    "error": e.code,
                    "started": started,
                    "finished": self._clock(),
                },
            )
            raise
        result_payload: dict[str, Any] = {
            "call_id": cid,
            "tool": name,
            "success": record.success,
            "result": record.result_text,
            "started": record.started,
            "finished": record.finished,
        }
        if record.error_code:
            result_payload["error"] = record.error_code
        if record.diagnostics is not None:
            result_payload["diagnostics"] = [d.to_dict() for d in record.diagnostics]
        if record.parse_error:
            result_payload["parse_error"] = record.parse_error
        self._log(EventKind.TOOL_RESULT, result_payload)
        return record

    def _call_fs(
        self, cid: str, name: str, args: dict[str, Any], started: float
    ) -> ToolCallRecord:
        result: FsResult = fs_tool(name, args, self.sandbox)
        for snap in result.snapshots:
            self._log(EventKind.FILE_SNAPSHOT, snap)
        return ToolCallRecord(
            call_id=cid,
            tool=name,
            args=args,
            success=True,
            result_text=result.text(),
            structured=result.payload,
            started=started,
            finished=self._clock(),
        )

    def _call_lean(
        self, cid: str, name: str, args: dict[str, Any], started: float
    ) -> ToolCallRecord:
        if self._handle is None:
            raise ToolchainUnavailable("no tool server configured for this session")
        while True:
            try:
                outcome = call_tool_wire(self._handle, name, args, self.call_timeout)
                break
            except ServerDied:
                # One respawn per death, bounded per session.
                self._respawn()

        diags: Optional[tuple[Diagnostic, ...]] = None
        parse_error = ""
        if name == "lean_diagnostic_messages" and outcome.success:
            payload: Any = (
                outcome.structured if outcome.structured is not None else outcome.text
            )
            try:
                diags = tuple(
                    parse_diagnostics(payload, default_file=str(args.get("file", "")))
                )
            except UnparseablePayload as e:
                parse_error = str(e)
        return ToolCallRecord(
            call_id=cid,
            tool=name,
            args=args,
            success=outcome.success,
            result_text=outcome.text,
            structured=outcome.structured,
            diagnostics=diags,
            parse_error=parse_error,
            error_code="TOOL_ERROR" if not outcome.success else "",
            started=started,
            finished=self._clock(),
        )
