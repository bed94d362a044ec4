"""HTTP surface for interactive proving sessions.

All responses are JSON except the event stream, which is standard
server-sent events: one ``id:``/``data:`` pair per transcript event,
ending once the terminal OUTCOME event has been sent. Errors share one
shape: ``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from ..model import Budget, InvalidTask
from ..transcript import EventKind
from .manager import ServiceError, SessionManager

STREAM_POLL_SECONDS = 0.2


def _error(code: str, message: str, status: int) -> JSONResponse:
    return JSONResponse(
        {"error": {"code": code, "message": message}}, status_code=status
    )


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="proofloop session service")

    @app.exception_handler(ServiceError)
    async def service_error(_request: Request, exc: ServiceError):
        return _error(exc.code, str(exc), exc.http_status)

    @app.exception_handler(InvalidTask)
    async def invalid_task(_request: Request, exc: InvalidTask):
        return _error("INVALID_TASK", str(exc), 422)

    @app.middleware("http")
    async def authenticate(request: Request, call_next):
        if manager.token is not None:
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {manager.token}":
                return _error("AUTH_FAILED", "missing or wrong bearer token", 401)
        return await call_next(request)

    async def read_json(request: Request) -> dict[str, Any]:
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise ServiceError("BAD_REQUEST", "request body must be JSON", 422)
        if not isinstance(body, dict):
            raise ServiceError("BAD_REQUEST", "request body must be an object", 422)
        return body

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await read_json(request)
        source_text = body.get("source_text")
        if not isinstance(source_text, str) or not source_text.strip():
            raise InvalidTask("source_text must be a nonempty string")
        budget: Optional[Budget] = None
        if body.get("budget") is not None:
            try:
                budget = Budget.from_dict(body["budget"])
            except (ValueError, TypeError) as e:
                raise InvalidTask(f"bad budget: {e}")
        session = manager.create_session(
            source_text,
            task_id=str(body.get("task_id", "") or ""),
            budget=budget,
            negation_probe=bool(body.get("negation_probe", False)),
            start_paused=bool(body.get("start_paused", False)),
        )
        return {"session_id": session.session_id}

    @app.get("/sessions")
    async def list_sessions():
        return {"sessions": manager.summaries()}

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return manager.summary(session_id)

    @app.post("/sessions/{session_id}/control")
    async def control(session_id: str, request: Request):
        body = await read_json(request)
        action = str(body.get("action", ""))
        text = str(body.get("text", "") or "")
        applied_seq = manager.control(session_id, action, text)
        return {"applied_seq": applied_seq}

    @app.get("/sessions/{session_id}/file")
    async def session_file(session_id: str):
        content = manager.file_content(session_id)
        return {"path": "task.lean", "content": content}

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, request: Request):
        manager.get(session_id)
        try:
            start = int(request.query_params.get("from", "0"))
        except ValueError:
            raise ServiceError("BAD_REQUEST", "from must be an integer", 422)

        def stream():
            next_seq = max(0, start)
            while True:
                batch = manager.events_since(session_id, next_seq)
                saw_outcome = False
                for ev in batch:
                    yield f"id: {ev.seq}\ndata: {ev.to_json_line()}\n\n"
                    next_seq = ev.seq + 1
                    if ev.kind is EventKind.OUTCOME:
                        saw_outcome = True
                if saw_outcome:
                    return
                session = manager.get(session_id)
                if session.finished and not manager.events_since(session_id, next_seq):
                    # Ended without an OUTCOME event (worker crash): stop.
                    return
                manager.wait_for(session_id, next_seq, STREAM_POLL_SECONDS)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
