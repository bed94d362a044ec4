"""Chat message model and history validation.

The history invariant: tool calls appear only on assistant turns, and
every assistant turn that requests tools is followed immediately by one
TOOL_RESULT per requested call id (in any order, nothing else between)
before the conversation continues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class Role(str, Enum):
    SYSTEM = "SYSTEM"
    USER = "USER"
    ASSISTANT = "ASSISTANT"
    TOOL_RESULT = "TOOL_RESULT"


_WIRE_ROLE = {
    Role.SYSTEM: "system",
    Role.USER: "user",
    Role.ASSISTANT: "assistant",
    Role.TOOL_RESULT: "tool",
}


class MalformedHistory(ValueError):
    """A message list that violates the conversation invariants."""


@dataclass(frozen=True)
class ToolCallRequest:
    """One tool invocation requested by an assistant turn."""

    call_id: str
    name: str
    arguments: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"call_id": self.call_id, "name": self.name, "arguments": self.arguments}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ToolCallRequest":
        return cls(d["call_id"], d["name"], d.get("arguments", {}))

    def to_wire(self) -> dict[str, Any]:
        return {
            "id": self.call_id,
            "type": "function",
            "function": {"name": self.name, "arguments": json.dumps(self.arguments)},
        }

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "ToolCallRequest":
        fn = d.get("function", {})
        raw = fn.get("arguments", "{}")
        try:
            arguments = json.loads(raw) if isinstance(raw, str) else dict(raw)
        except json.JSONDecodeError:
            arguments = {"_raw": raw}
        if not isinstance(arguments, dict):
            arguments = {"_value": arguments}
        return cls(str(d.get("id", "")), str(fn.get("name", "")), arguments)


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str = ""
    tool_calls: tuple[ToolCallRequest, ...] = ()
    tool_call_id: str = ""

    def __post_init__(self) -> None:
        if self.tool_calls and self.role is not Role.ASSISTANT:
            raise MalformedHistory("tool_calls allowed only on assistant messages")
        if self.tool_call_id and self.role is not Role.TOOL_RESULT:
            raise MalformedHistory("tool_call_id allowed only on tool result messages")
        if self.role is Role.TOOL_RESULT and not self.tool_call_id:
            raise MalformedHistory("tool result messages require tool_call_id")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"role": self.role.value, "content": self.content}
        if self.tool_calls:
            d["tool_calls"] = [t.to_dict() for t in self.tool_calls]
        if self.tool_call_id:
            d["tool_call_id"] = self.tool_call_id
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ChatMessage":
        return cls(
            role=Role(d["role"]),
            content=d.get("content", "") or "",
            tool_calls=tuple(
                ToolCallRequest.from_dict(t) for t in d.get("tool_calls", [])
            ),
            tool_call_id=d.get("tool_call_id", ""),
        )

    def to_wire(self) -> dict[str, Any]:
        d: dict[str, Any] = {"role": _WIRE_ROLE[self.role], "content": self.content}
        if self.tool_calls:
            d["tool_calls"] = [t.to_wire() for t in self.tool_calls]
        if self.tool_call_id:
            d["tool_call_id"] = self.tool_call_id
        return d


def system(text: str) -> ChatMessage:
    return ChatMessage(Role.SYSTEM, text)


def user(text: str) -> ChatMessage:
    return ChatMessage(Role.USER, text)


def assistant(text: str, tool_calls: tuple[ToolCallRequest, ...] = ()) -> ChatMessage:
    return ChatMessage(Role.ASSISTANT, text, tool_calls)


def tool_result(call_id: str, text: str) -> ChatMessage:
    return ChatMessage(Role.TOOL_RESULT, text, tool_call_id=call_id)


def validate_history(history: list[ChatMessage], for_completion: bool = True) -> None:
    """Check the conversation invariants over a full history.

    With ``for_completion`` every requested tool call must already have
    its result; without it a trailing unanswered assistant turn is
    accepted (the state mid-turn, while tools are still running).
    """
    if not history:
        raise MalformedHistory("history is empty")
    pending: set[str] = set()
    answered: set[str] = set()
    for i, msg in enumerate(history):
        if not isinstance(msg, ChatMessage):
            raise MalformedHistory(f"history[{i}] is not a ChatMessage")
        if msg.role is Role.TOOL_RESULT:
            if msg.tool_call_id not in pending:
                raise MalformedHistory(
                    f"history[{i}] answers unknown or non-adjacent call "
                    f"{msg.tool_call_id!r}"
                )
            pending.discard(msg.tool_call_id)
            answered.add(msg.tool_call_id)
            continue
        if pending:
            raise MalformedHistory(
                f"history[{i}]: previous assistant turn has unanswered tool calls "
                f"{sorted(pending)}"
            )
        if msg.role is Role.ASSISTANT and msg.tool_calls:
            ids = [t.call_id for t in msg.tool_calls]
            if len(ids) != len(set(ids)):
                raise MalformedHistory(f"history[{i}] repeats a call id")
            dup = answered.intersection(ids)
            if dup:
                raise MalformedHistory(f"history[{i}] reuses call ids {sorted(dup)}")
            pending = set(ids)
    if for_completion and pending:
        raise MalformedHistory(
            f"last assistant turn has unanswered tool calls {sorted(pending)}"
        )
