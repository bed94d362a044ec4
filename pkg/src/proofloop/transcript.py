"""Append-only session transcripts.

A transcript is a line-delimited JSON log (``.axlog``): one event per
line, sequence numbers gapless from zero, never rewritten.  Both the
replayable-script loader and the live session service are built on this
format, so reading and writing live here.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

TRANSCRIPT_SUFFIX = ".axlog"


class EventKind(str, Enum):
    LLM_REQUEST = "LLM_REQUEST"
    LLM_RESPONSE = "LLM_RESPONSE"
    TOOL_CALL = "TOOL_CALL"
    TOOL_RESULT = "TOOL_RESULT"
    FILE_SNAPSHOT = "FILE_SNAPSHOT"
    PHASE_CHANGE = "PHASE_CHANGE"
    FEEDBACK = "FEEDBACK"
    HINT = "HINT"
    VERDICT = "VERDICT"
    OUTCOME = "OUTCOME"


class TranscriptError(ValueError):
    """A transcript file or event stream that violates the format."""


def _now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass(frozen=True)
class TranscriptEvent:
    session_id: str
    seq: int
    ts: str
    kind: EventKind
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "ts": self.ts,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    def to_json_line(self) -> str:
        return json.dumps(
            self.to_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")
        )

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TranscriptEvent":
        try:
            return cls(
                session_id=d["session_id"],
                seq=int(d["seq"]),
                ts=d["ts"],
                kind=EventKind(d["kind"]),
                payload=d["payload"],
            )
        except (KeyError, ValueError, TypeError) as e:
            raise TranscriptError(f"bad transcript event: {e}") from e

    @classmethod
    def from_json_line(cls, line: str) -> "TranscriptEvent":
        try:
            d = json.loads(line)
        except json.JSONDecodeError as e:
            raise TranscriptError(f"transcript line is not JSON: {e}") from e
        if not isinstance(d, dict):
            raise TranscriptError("transcript line is not an object")
        return cls.from_dict(d)


class Transcript:
    """In-memory event log for one session, optionally mirrored to disk.

    Appends are serialized under a lock so the session thread and the
    control plane can both write; waiters are woken on every append so
    streaming readers can follow the log live.
    """

    def __init__(
        self,
        session_id: str,
        path: Optional[Path] = None,
        clock: Callable[[], str] = _now_rfc3339,
    ):
        self.session_id = session_id
        self.path = Path(path) if path is not None else None
        self._clock = clock
        self._events: list[TranscriptEvent] = []
        self._cond = threading.Condition()
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, kind: EventKind, payload: dict[str, Any]) -> TranscriptEvent:
        with self._cond:
            ev = TranscriptEvent(
                session_id=self.session_id,
                seq=len(self._events),
                ts=self._clock(),
                kind=kind,
                payload=payload,
            )
            self._events.append(ev)
            if self._fh is not None:
                self._fh.write(ev.to_json_line() + "\n")
                self._fh.flush()
            self._cond.notify_all()
            return ev

    def events(self) -> list[TranscriptEvent]:
        with self._cond:
            return list(self._events)

    def events_since(self, seq: int) -> list[TranscriptEvent]:
        """Events with sequence number >= seq."""
        with self._cond:
            return list(self._events[max(0, seq) :])

    @property
    def last_seq(self) -> int:
        """Sequence number of the newest event, -1 when empty."""
        with self._cond:
            return len(self._events) - 1

    def wait_for(self, seq: int, timeout: float = 0.5) -> bool:
        """Block until an event with sequence >= seq exists (or timeout)."""
        with self._cond:
            return self._cond.wait_for(lambda: len(self._events) > seq, timeout)

    def close(self) -> None:
        with self._cond:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def read_transcript(path: Path | str, validate: bool = True) -> list[TranscriptEvent]:
    """Load all events from a transcript file."""
    events: list[TranscriptEvent] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(TranscriptEvent.from_json_line(line))
            except TranscriptError as e:
                raise TranscriptError(f"{path}:{lineno + 1}: {e}") from e
    if validate:
        validate_event_stream(events)
    return events


def validate_event_stream(events: Iterable[TranscriptEvent]) -> None:
    """Check sequence gaplessness and tool-call pairing."""
    open_calls: dict[str, int] = {}
    for i, ev in enumerate(events):
        if ev.seq != i:
            raise TranscriptError(f"sequence gap: event {i} has seq {ev.seq}")
        if ev.kind is EventKind.TOOL_CALL:
            cid = ev.payload.get("call_id")
            if not cid:
                raise TranscriptError(f"TOOL_CALL at seq {i} lacks call_id")
            if cid in open_calls:
                raise TranscriptError(f"duplicate call_id {cid!r}")
            open_calls[cid] = i
        elif ev.kind is EventKind.TOOL_RESULT:
            cid = ev.payload.get("call_id")
            if cid not in open_calls:
                raise TranscriptError(
                    f"TOOL_RESULT at seq {i} has no matching TOOL_CALL"
                )
            del open_calls[cid]
    if open_calls:
        missing = ", ".join(sorted(open_calls))
        raise TranscriptError(f"TOOL_CALL without TOOL_RESULT: {missing}")


def strip_volatile(value: Any) -> Any:
    """Recursively drop timing fields for determinism comparisons.

    Two runs of the same scripted session must be identical once ``ts``
    and the started/finished/elapsed timing fields are removed.
    """
    volatile = {"ts", "started", "finished", "elapsed"}
    if isinstance(value, dict):
        return {
            k: strip_volatile(v) for k, v in value.items() if k not in volatile
        }
    if isinstance(value, list):
        return [strip_volatile(v) for v in value]
    return value


def normalized_events(events: Iterable[TranscriptEvent]) -> list[dict[str, Any]]:
    return [strip_volatile(ev.to_dict()) for ev in events]
