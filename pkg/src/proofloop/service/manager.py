"""Session lifecycle for the collaboration service.

Each session runs in its own worker thread. Operators steer it through a
control state polled at every turn boundary: pause blocks the loop,
hints queue up as extra context messages, abort raises out of the loop.
Hints are written to the transcript the moment they arrive, so a hint's
event always precedes the completion request that consumes it.
"""

from __future__ import annotations

import threading
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from ..agents import AbortRequested, run_task_session
from ..backend.providers import ChatBackend
from ..model import Budget, InvalidTask, SessionOutcome, TheoremTask
from ..transcript import EventKind, Transcript, TranscriptEvent


class ServiceError(RuntimeError):
    """Request-level failure with a stable error code."""

    def __init__(self, code: str, message: str, http_status: int):
        super().__init__(message)
        self.code = code
        self.http_status = http_status


class UnknownSession(ServiceError):
    def __init__(self, session_id: str):
        super().__init__("UNKNOWN_SESSION", f"no session {session_id!r}", 404)


class SessionTerminal(ServiceError):
    def __init__(self, session_id: str):
        super().__init__(
            "SESSION_TERMINAL", f"session {session_id!r} already ended", 409
        )


class CapacityExceeded(ServiceError):
    def __init__(self, limit: int):
        super().__init__(
            "CAPACITY", f"all {limit} session slots are busy; retry later", 503
        )


class EmptyHint(ServiceError):
    def __init__(self):
        super().__init__("EMPTY_HINT", "a hint needs nonempty text", 422)


class ControlState:
    """Operator controls shared between API threads and one session."""

    def __init__(self, transcript: Transcript, start_paused: bool = False):
        self._cond = threading.Condition()
        self._transcript = transcript
        self._paused = start_paused
        self._abort_reason: Optional[str] = None
        self._hints: list[str] = []

    # Called from the session thread at every turn boundary.
    def checkpoint(self) -> list[str]:
        with self._cond:
            while self._paused and self._abort_reason is None:
                self._cond.wait()
            if self._abort_reason is not None:
                raise AbortRequested(self._abort_reason)
            drained = self._hints[:]
            self._hints.clear()
            return drained

    @property
    def paused(self) -> bool:
        with self._cond:
            return self._paused

    def pause(self) -> int:
        with self._cond:
            self._paused = True
        return self._transcript.last_seq

    def resume(self) -> int:
        with self._cond:
            self._paused = False
            self._cond.notify_all()
        return self._transcript.last_seq

    def hint(self, text: str) -> int:
        event = self._transcript.append(
            EventKind.HINT, {"text": text, "issued_by": "operator"}
        )
        with self._cond:
            self._hints.append(text)
            self._cond.notify_all()
        return event.seq

    def abort(self, reason: str = "aborted by operator") -> int:
        with self._cond:
            self._abort_reason = reason
            self._cond.notify_all()
        return self._transcript.last_seq


@dataclass
class Session:
    session_id: str
    task: TheoremTask
    budget: Budget
    transcript: Transcript
    controls: ControlState
    workdir: Path
    created: float
    thread: Optional[threading.Thread] = None
    outcome: Optional[SessionOutcome] = None
    error: str = ""
    _finished: threading.Event = field(default_factory=threading.Event)

    @property
    def finished(self) -> bool:
        return self._finished.is_set()

    def join(self, timeout: Optional[float] = None) -> bool:
        return self._finished.wait(timeout)


class SessionManager:
    """Owns every live session of one service process."""

    def __init__(
        self,
        root_dir: Path | str,
        backend_factory: Callable[[TheoremTask], ChatBackend],
        server_command: Optional[list[str]] = None,
        max_sessions: int = 8,
        token: Optional[str] = None,
    ):
        self.root = Path(root_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.backend_factory = backend_factory
        self.server_command = list(server_command) if server_command else None
        self.max_sessions = max_sessions
        self.token = token
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._counter = 0

    # -- lifecycle ----------------------------------------------------

    def create_session(
        self,
        source_text: str,
        *,
        task_id: str = "",
        budget: Optional[Budget] = None,
        negation_probe: bool = False,
        start_paused: bool = False,
    ) -> Session:
        """Validate the task, allocate a slot, and start the worker.

        Raises InvalidTask for files that are not exactly one open
        theorem and CapacityExceeded when every slot is running.
        """
        with self._lock:
            running = sum(1 for s in self._sessions.values() if not s.finished)
            if running >= self.max_sessions:
                raise CapacityExceeded(self.max_sessions)
            self._counter += 1
            session_id = f"s{self._counter}"
        task = TheoremTask.from_source(
            id=task_id or session_id,
            source_path=f"{session_id}/task.lean",
            source_text=source_text,
        )
        workdir = self.root / session_id
        workdir.mkdir(parents=True, exist_ok=True)
        transcript = Transcript(session_id, workdir / "session.axlog")
        controls = ControlState(transcript, start_paused=start_paused)
        session = Session(
            session_id=session_id,
            task=task,
            budget=budget or Budget(),
            transcript=transcript,
            controls=controls,
            workdir=workdir,
            created=time.time(),
        )
        with self._lock:
            self._sessions[session_id] = session

        def work() -> None:
            try:
                outcome, _ = run_task_session(
                    task,
                    session.budget,
                    self.backend_factory(task),
                    workdir / "work",
                    server_command=self.server_command,
                    session_id=session_id,
                    transcript=transcript,
                    controls=controls,
                    negation_probe=negation_probe,
                )
                session.outcome = outcome
            except Exception:
                session.error = traceback.format_exc()
            finally:
                transcript.close()
                session._finished.set()

        thread = threading.Thread(target=work, name=f"session-{session_id}", daemon=True)
        session.thread = thread
        thread.start()
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())

    # -- controls -----------------------------------------------------

    def control(self, session_id: str, action: str, text: str = "") -> int:
        """Apply one operator action; returns the applied sequence number."""
        session = self.get(session_id)
        if session.finished:
            raise SessionTerminal(session_id)
        action = action.upper()
        if action == "PAUSE":
            return session.controls.pause()
        if action == "RESUME":
            return session.controls.resume()
        if action == "ABORT":
            return session.controls.abort()
        if action == "HINT":
            if not text.strip():
                raise EmptyHint()
            return session.controls.hint(text)
        raise ServiceError("UNKNOWN_ACTION", f"unsupported action {action!r}", 422)

    # -- read side ----------------------------------------------------

    def events_since(self, session_id: str, seq: int) -> list[TranscriptEvent]:
        return self.get(session_id).transcript.events_since(seq)

    def wait_for(self, session_id: str, seq: int, timeout: float) -> bool:
        return self.get(session_id).transcript.wait_for(seq, timeout)

    def file_content(self, session_id: str) -> str:
        session = self.get(session_id)
        path = session.workdir / "work" / "task.lean"
        if not path.is_file():
            return session.task.source_text
        return path.read_text(encoding="utf-8")

    def summary(self, session_id: str) -> dict[str, Any]:
        return self._summarize(self.get(session_id))

    def summaries(self) -> list[dict[str, Any]]:
        return [self._summarize(s) for s in self.sessions()]

    def _summarize(self, session: Session) -> dict[str, Any]:
        """Session state as read back from its transcript alone."""
        events = session.transcript.events()
        phase = "ASSIGNED"
        status = "RUNNING"
        rounds = 0
        api_calls = 0
        tool_calls = 0
        for ev in events:
            if ev.kind is EventKind.PHASE_CHANGE:
                phase = ev.payload.get("to", phase)
            elif ev.kind is EventKind.VERDICT:
                rounds += 1
            elif ev.kind is EventKind.LLM_REQUEST:
                api_calls += 1
            elif ev.kind is EventKind.TOOL_CALL:
                tool_calls += 1
            elif ev.kind is EventKind.OUTCOME:
                status = ev.payload.get("outcome", {}).get("status", status)
        if session.error and status == "RUNNING":
            status = "ERROR"
        return {
            "session_id": session.session_id,
            "task_id": session.task.id,
            "phase": phase,
            "status": status,
            "paused": session.controls.paused,
            "rounds_used": rounds,
            "api_calls_used": api_calls,
            "tool_calls_used": tool_calls,
            "last_seq": session.transcript.last_seq,
            "created": session.created,
            "finished": session.finished,
        }
