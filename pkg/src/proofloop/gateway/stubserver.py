"""Scriptable stand-in for the Lean tool server, speaking real MCP stdio.

Run as ``python -m proofloop.gateway.stubserver --fixture behavior.json``.
The fixture controls advertised tools, canned responses, per-tool delays,
deliberate crashes, and a ``fake_lean`` mode that derives diagnostics
from the target file's content the way the real server would:

- every ``sorry``/``admit`` token yields a severity-2 sorry notice
- every ``BROKEN`` token yields a severity-1 error
- otherwise the file is reported clean

Fixture keys (all optional): ``tools`` (names to advertise), ``responses``
(ordered entries ``{tool, match, text|structured, is_error, once}``),
``delays`` (tool -> seconds), ``die_on`` (tool -> nth call exits),
``fake_lean`` (bool, default true), ``default_text``,
``protocol_version``, ``no_initialize_reply``, ``exit_on_start``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path
from typing import Any

DEFAULT_LEAN_TOOLS = [
    "lean_build",
    "lean_file_contents",
    "lean_declaration_file",
    "lean_diagnostic_messages",
    "lean_goal",
    "lean_term_goal",
    "lean_hover_info",
    "lean_completions",
    "lean_multi_attempt",
    "lean_run_code",
    "lean_leansearch",
    "lean_loogle",
    "lean_state_search",
    "lean_hammer_premise",
]

_TOKEN = r"(?<![\w']){word}(?![\w'])"


def _code_lines(text: str) -> list[str]:
    """Crude comment removal, line by line; good enough for fixtures."""
    out = []
    in_block = 0
    for line in text.splitlines():
        if in_block:
            if "-/" in line:
                line = line.split("-/", 1)[1]
                in_block = 0
            else:
                out.append("")
                continue
        if "/-" in line:
            line = line.split("/-", 1)[0]
            in_block = 1
        out.append(line.split("--", 1)[0])
    return out


def fake_lean_diagnostics(path: Path) -> list[dict[str, Any]]:
    if not path.is_file():
        return [
            {
                "severity": 1,
                "message": f"file not found: {path.name}",
                "range": {"start": {"line": 0, "character": 0}, "end": {"line": 0, "character": 0}},
            }
        ]
    diags: list[dict[str, Any]] = []
    for lineno, line in enumerate(_code_lines(path.read_text(encoding="utf-8"))):
        for word, sev, msg in [
            ("sorry", 2, "declaration uses 'sorry'"),
            ("admit", 2, "declaration uses 'sorry'"),
            ("BROKEN", 1, "unknown identifier 'BROKEN'"),
        ]:
            for m in re.finditer(_TOKEN.format(word=word), line):
                diags.append(
                    {
                        "severity": sev,
                        "message": msg,
                        "range": {
                            "start": {"line": lineno, "character": m.start()},
                            "end": {"line": lineno, "character": m.end()},
                        },
                    }
                )
    return diags


class StubServer:
    def __init__(self, fixture: dict[str, Any]):
        self.fixture = fixture
        self.responses = [dict(r) for r in fixture.get("responses", [])]
        self.call_counts: dict[str, int] = {}

    def _reply(self, msg_id: Any, result: Any) -> None:
        self._emit({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def _error(self, msg_id: Any, code: int, message: str) -> None:
        self._emit({"jsonrpc": "2.0", "id": msg_id, "error": {"code": code, "message": message}})

    @staticmethod
    def _emit(obj: dict[str, Any]) -> None:
        sys.stdout.buffer.write((json.dumps(obj) + "\n").encode("utf-8"))
        sys.stdout.buffer.flush()

    def _tool_list(self) -> list[dict[str, Any]]:
        names = self.fixture.get("tools", DEFAULT_LEAN_TOOLS)
        return [
            {
                "name": n,
                "description": f"stub tool {n}",
                "inputSchema": {"type": "object", "properties": {}},
            }
            for n in names
        ]

    def _scripted(self, tool: str, args: dict[str, Any]) -> dict[str, Any] | None:
        for entry in self.responses:
            if entry.get("_consumed"):
                continue
            if entry.get("tool") != tool:
                continue
            match = entry.get("match", {})
            if any(str(args.get(k)) != str(v) for k, v in match.items()):
                continue
            if entry.get("once"):
                entry["_consumed"] = True
            return entry
        return None

    def _tool_call(self, msg_id: Any, params: dict[str, Any]) -> None:
        tool = params.get("name", "")
        args = params.get("arguments", {}) or {}
        self.call_counts[tool] = self.call_counts.get(tool, 0) + 1

        die_at = self.fixture.get("die_on", {}).get(tool)
        if die_at is not None and self.call_counts[tool] >= int(die_at):
            sys.exit(3)

        delay = self.fixture.get("delays", {}).get(tool)
        if delay:
            time.sleep(float(delay))

        entry = self._scripted(tool, args)
        if entry is not None:
            if "structured" in entry:
                text = json.dumps(entry["structured"])
            else:
                text = str(entry.get("text", ""))
            result: dict[str, Any] = {"content": [{"type": "text", "text": text}]}
            if "structured" in entry:
                result["structuredContent"] = entry["structured"]
            if entry.get("is_error"):
                result["isError"] = True
            self._reply(msg_id, result)
            return

        if tool == "lean_diagnostic_messages" and self.fixture.get("fake_lean", True):
            target = Path(str(args.get("file", "")))
            diags = fake_lean_diagnostics(target)
            self._reply(
                msg_id,
                {
                    "content": [{"type": "text", "text": json.dumps(diags)}],
                    "structuredContent": {"diagnostics": diags},
                },
            )
            return

        if tool == "lean_file_contents" and self.fixture.get("fake_lean", True):
            target = Path(str(args.get("file", "")))
            if target.is_file():
                self._reply(
                    msg_id,
                    {"content": [{"type": "text", "text": target.read_text(encoding="utf-8")}]},
                )
            else:
                self._reply(
                    msg_id,
                    {"content": [{"type": "text", "text": "file not found"}], "isError": True},
                )
            return

        text = str(self.fixture.get("default_text", "ok"))
        self._reply(msg_id, {"content": [{"type": "text", "text": text}]})

    def serve(self) -> None:
        if self.fixture.get("exit_on_start"):
            sys.exit(2)
        for raw in sys.stdin.buffer:
            try:
                msg = json.loads(raw.decode("utf-8"))
            except json.JSONDecodeError:
                continue
            method = msg.get("method", "")
            msg_id = msg.get("id")
            if method == "initialize":
                if self.fixture.get("no_initialize_reply"):
                    continue
                self._reply(
                    msg_id,
                    {
                        "protocolVersion": self.fixture.get(
                            "protocol_version", "2024-11-05"
                        ),
                        "serverInfo": {"name": "stub-lean-tools", "version": "0.1.0"},
                        "capabilities": {"tools": {}},
                    },
                )
            elif method == "notifications/initialized":
                continue
            elif method == "tools/list":
                self._reply(msg_id, {"tools": self._tool_list()})
            elif method == "tools/call":
                self._tool_call(msg_id, msg.get("params", {}) or {})
            elif msg_id is not None:
                self._error(msg_id, -32601, f"method not found: {method}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixture", help="JSON behavior fixture", default=None)
    args = parser.parse_args(argv)
    fixture: dict[str, Any] = {}
    if args.fixture:
        fixture = json.loads(Path(args.fixture).read_text(encoding="utf-8"))
    StubServer(fixture).serve()
    return 0


if __name__ == "__main__":
    sys.exit(main())
