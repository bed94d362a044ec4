"""Completion providers: HTTP chat-completions and scripted replay."""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Any, Callable, Optional, Protocol, Sequence

import httpx

from ..transcript import EventKind, Transcript, TranscriptError, read_transcript
from .config import BackendConfig, ProviderKind
from .messages import ChatMessage, MalformedHistory, Role, ToolCallRequest

MAX_ATTEMPTS = 3
BACKOFF_BASE = 0.5


class ProviderError(RuntimeError):
    """Completion request failed after all retries."""


class ScriptExhausted(ProviderError):
    """A scripted backend ran out of prepared assistant turns."""


class ScriptParseError(ValueError):
    """A script file is not a valid assistant-turn transcript."""


class ChatBackend(Protocol):
    def complete(
        self, history: Sequence[ChatMessage], tools: Sequence[dict[str, Any]]
    ) -> ChatMessage: ...


class HttpChatBackend:
    """Chat-completions over HTTP.

    Transient failures (transport errors, 429, 5xx) are retried up to
    three attempts with exponential backoff; the whole exchange still
    counts as a single API call to the budget, which is why retrying
    lives below the accounting layer.
    """

    def __init__(
        self,
        config: BackendConfig,
        transport: Optional[httpx.BaseTransport] = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleeper = sleeper
        headers = {"Content-Type": "application/json"}
        if config.api_key_env:
            key = os.environ.get(config.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            transport=transport,
            headers=headers,
            timeout=config.request_timeout,
        )

    def close(self) -> None:
        self._client.close()

    def _build_request(
        self, history: Sequence[ChatMessage], tools: Sequence[dict[str, Any]]
    ) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.config.model,
            "messages": [m.to_wire() for m in history],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        if tools:
            body["tools"] = list(tools)
            body["tool_choice"] = "auto"
        return body

    @staticmethod
    def _parse_response(data: dict[str, Any]) -> ChatMessage:
        try:
            message = data["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"malformed completion response: {e}") from e
        calls = tuple(
            ToolCallRequest.from_wire(t) for t in message.get("tool_calls") or []
        )
        return ChatMessage(
            role=Role.ASSISTANT,
            content=message.get("content") or "",
            tool_calls=calls,
        )

    def complete(
        self, history: Sequence[ChatMessage], tools: Sequence[dict[str, Any]]
    ) -> ChatMessage:
        body = self._build_request(history, tools)
        last_error = ""
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                self._sleeper(BACKOFF_BASE * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.config.endpoint, json=body)
            except httpx.HTTPError as e:
                last_error = f"transport error: {e}"
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"retryable status {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"completion rejected with status {resp.status_code}: "
                    f"{resp.text[:200]}"
                )
            try:
                data = resp.json()
            except json.JSONDecodeError as e:
                raise ProviderError(f"completion response is not JSON: {e}") from e
            return self._parse_response(data)
        raise ProviderError(f"completion failed after {MAX_ATTEMPTS} attempts: {last_error}")


class ScriptedBackend:
    """Replays assistant turns from a transcript file.

    The script format is the transcript format filtered to LLM_RESPONSE
    events; history content is ignored during replay, only order matters.
    """

    def __init__(self, turns: Sequence[ChatMessage], source: str = ""):
        self._turns = list(turns)
        self._cursor = 0
        self.source = source

    @property
    def remaining(self) -> int:
        return len(self._turns) - self._cursor

    def complete(
        self, history: Sequence[ChatMessage], tools: Sequence[dict[str, Any]]
    ) -> ChatMessage:
        if self._cursor >= len(self._turns):
            raise ScriptExhausted(
                f"script {self.source or '<memory>'} exhausted after "
                f"{self._cursor} turns"
            )
        msg = self._turns[self._cursor]
        self._cursor += 1
        return msg


def load_script(path: Path | str) -> list[ChatMessage]:
    """Read a script: the LLM_RESPONSE turns of a transcript file."""
    try:
        events = read_transcript(path, validate=False)
    except (OSError, TranscriptError) as e:
        raise ScriptParseError(f"cannot read script {path}: {e}") from e
    turns: list[ChatMessage] = []
    for ev in events:
        if ev.kind is not EventKind.LLM_RESPONSE:
            continue
        raw = ev.payload.get("message")
        if not isinstance(raw, dict):
            raise ScriptParseError(
                f"script {path}: LLM_RESPONSE at seq {ev.seq} has no message"
            )
        try:
            msg = ChatMessage.from_dict(raw)
        except (KeyError, ValueError, MalformedHistory) as e:
            raise ScriptParseError(f"script {path}: bad message at seq {ev.seq}: {e}")
        if msg.role is not Role.ASSISTANT:
            raise ScriptParseError(
                f"script {path}: turn at seq {ev.seq} is not an assistant message"
            )
        turns.append(msg)
    return turns


def write_script(path: Path | str, turns: Sequence[ChatMessage], session_id: str = "script") -> None:
    """Author a script file from assistant turns (test/authoring helper)."""
    t = Transcript(session_id, Path(path))
    for msg in turns:
        t.append(EventKind.LLM_RESPONSE, {"message": msg.to_dict()})
    t.close()


def build_backend(
    config: BackendConfig, transport: Optional[httpx.BaseTransport] = None
) -> ChatBackend:
    if config.provider is ProviderKind.SCRIPTED:
        return ScriptedBackend(load_script(config.script_path), source=config.script_path)
    return HttpChatBackend(config, transport=transport)
