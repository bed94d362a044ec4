"""Collaboration service: session API, controls, and event streaming."""

from __future__ import annotations

import json
import sys

import pytest
from fastapi.testclient import TestClient

from proofloop.backend import ScriptedBackend, ToolCallRequest, assistant, write_script
from proofloop.service import SessionManager, create_app
from proofloop.service.__main__ import scripted_factory
from proofloop.transcript import EventKind

TASK_SOURCE = (
    "-- a small demo obligation\n"
    "theorem demo (n : Nat) : n + 0 = n := by\n"
    "  sorry\n"
)

FINAL_PROOF = (
    "-- a small demo obligation\n"
    "theorem demo (n : Nat) : n + 0 = n := by\n"
    "  have h1 : n + 0 = n := Nat.add_zero n\n"
    "  exact h1\n"
)


def stub_command() -> list[str]:
    return [sys.executable, "-m", "proofloop.gateway.stubserver"]


def write_turn(content: str, file_content: str, call_id: str):
    return assistant(
        content,
        tool_calls=(
            ToolCallRequest(
                call_id=call_id,
                name="write_file",
                arguments={"path": "task.lean", "content": file_content},
            ),
        ),
    )


def happy_path_turns() -> list:
    return [
        assistant("The file declares theorem demo with one open obligation."),
        assistant("Plan:\n1. Reduce n + 0 to n with Nat.add_zero.\n2. Close the goal."),
        assistant(
            "Skeleton steps:\n"
            "have h1 : n + 0 = n := by sorry\n"
            "have h2 : n = n := by sorry"
        ),
        write_turn("Writing the finished proof.", FINAL_PROOF, "c1"),
    ]


def make_manager(tmp_path, **kwargs) -> SessionManager:
    return SessionManager(
        tmp_path / "state",
        lambda task: ScriptedBackend(happy_path_turns()),
        stub_command(),
        **kwargs,
    )


@pytest.fixture()
def service(tmp_path):
    manager = make_manager(tmp_path)
    with TestClient(create_app(manager)) as client:
        yield manager, client


def create_session(client, **extra) -> str:
    body = {"source_text": TASK_SOURCE}
    body.update(extra)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()["session_id"]


def wait_done(manager, session_id, timeout=30.0):
    session = manager.get(session_id)
    assert session.join(timeout), f"session {session_id} did not finish"
    assert not session.error, session.error
    return session


def read_stream(client, session_id: str, start: int = 0):
    """Consume one SSE response into (seq, event-dict) pairs."""
    events = []
    current = None
    with client.stream(
        "GET", f"/sessions/{session_id}/events", params={"from": start}
    ) as resp:
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("text/event-stream")
        for line in resp.iter_lines():
            if line.startswith("id: "):
                current = int(line[len("id: "):])
            elif line.startswith("data: "):
                events.append((current, json.loads(line[len("data: "):])))
    return events


class TestSessionLifecycle:
    def test_create_runs_to_verified(self, service):
        manager, client = service
        sid = create_session(client)
        wait_done(manager, sid)
        got = client.get(f"/sessions/{sid}")
        assert got.status_code == 200
        summary = got.json()
        assert summary["status"] == "VERIFIED"
        assert summary["phase"] == "TERMINAL"
        assert summary["api_calls_used"] == 4
        assert summary["rounds_used"] == 1
        assert summary["finished"] is True
        assert summary["paused"] is False

    def test_listing_covers_every_session(self, service):
        manager, client = service
        first = create_session(client)
        second = create_session(client)
        wait_done(manager, first)
        wait_done(manager, second)
        listed = client.get("/sessions").json()["sessions"]
        assert {row["session_id"] for row in listed} == {first, second}
        assert all(row["status"] == "VERIFIED" for row in listed)

    def test_file_reflects_latest_write(self, service):
        manager, client = service
        sid = create_session(client)
        wait_done(manager, sid)
        body = client.get(f"/sessions/{sid}/file").json()
        assert body["path"] == "task.lean"
        assert body["content"] == FINAL_PROOF

    def test_budget_override_applies(self, service):
        manager, client = service
        sid = create_session(client, budget={"max_api_calls": 1})
        wait_done(manager, sid)
        summary = client.get(f"/sessions/{sid}").json()
        assert summary["status"] == "FAILED_BUDGET_CALLS"
        assert summary["api_calls_used"] == 1


class TestValidation:
    def test_task_without_obligation_rejected(self, service):
        _, client = service
        resp = client.post(
            "/sessions", json={"source_text": "def foo : Nat := 1\n"}
        )
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "INVALID_TASK"

    def test_empty_source_rejected(self, service):
        _, client = service
        resp = client.post("/sessions", json={"source_text": "  "})
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "INVALID_TASK"

    def test_bad_budget_rejected(self, service):
        _, client = service
        resp = client.post(
            "/sessions",
            json={"source_text": TASK_SOURCE, "budget": {"max_api_calls": 0}},
        )
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "INVALID_TASK"

    def test_non_json_body_rejected(self, service):
        _, client = service
        resp = client.post(
            "/sessions",
            content=b"not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "BAD_REQUEST"

    def test_unknown_session_everywhere(self, service):
        _, client = service
        for method, url in [
            ("GET", "/sessions/nope"),
            ("POST", "/sessions/nope/control"),
            ("GET", "/sessions/nope/events"),
            ("GET", "/sessions/nope/file"),
        ]:
            resp = client.request(method, url, json={"action": "PAUSE"})
            assert resp.status_code == 404, url
            assert resp.json()["error"]["code"] == "UNKNOWN_SESSION"


class TestControls:
    def test_empty_hint_rejected(self, service):
        manager, client = service
        sid = create_session(client, start_paused=True)
        resp = client.post(
            f"/sessions/{sid}/control", json={"action": "HINT", "text": "   "}
        )
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "EMPTY_HINT"
        client.post(f"/sessions/{sid}/control", json={"action": "RESUME"})
        wait_done(manager, sid)

    def test_unknown_action_rejected(self, service):
        manager, client = service
        sid = create_session(client, start_paused=True)
        resp = client.post(f"/sessions/{sid}/control", json={"action": "DANCE"})
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "UNKNOWN_ACTION"
        client.post(f"/sessions/{sid}/control", json={"action": "RESUME"})
        wait_done(manager, sid)

    def test_control_after_end_conflicts(self, service):
        manager, client = service
        sid = create_session(client)
        wait_done(manager, sid)
        resp = client.post(f"/sessions/{sid}/control", json={"action": "PAUSE"})
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "SESSION_TERMINAL"

    def test_abort_ends_session(self, service):
        manager, client = service
        sid = create_session(client, start_paused=True)
        summary = client.get(f"/sessions/{sid}").json()
        assert summary["paused"] is True
        assert summary["status"] == "RUNNING"
        resp = client.post(f"/sessions/{sid}/control", json={"action": "ABORT"})
        assert resp.status_code == 200
        wait_done(manager, sid)
        summary = client.get(f"/sessions/{sid}").json()
        assert summary["status"] == "ABORTED"

    def test_hint_lands_before_the_request_that_uses_it(self, service):
        manager, client = service
        sid = create_session(client, start_paused=True)
        hint_text = "Try Nat.add_zero for the first step."
        hinted = client.post(
            f"/sessions/{sid}/control", json={"action": "HINT", "text": hint_text}
        )
        assert hinted.status_code == 200
        applied_seq = hinted.json()["applied_seq"]
        client.post(f"/sessions/{sid}/control", json={"action": "RESUME"})
        wait_done(manager, sid)

        events = manager.events_since(sid, 0)
        hints = [e for e in events if e.kind is EventKind.HINT]
        assert len(hints) == 1
        assert hints[0].seq == applied_seq
        assert hints[0].payload["text"] == hint_text

        consuming = [
            e
            for e in events
            if e.kind is EventKind.LLM_REQUEST and hint_text in json.dumps(e.payload)
        ]
        assert consuming, "no completion request carried the hint"
        assert applied_seq < consuming[0].seq
        assert consuming[0].seq == min(
            e.seq for e in events if e.kind is EventKind.LLM_REQUEST
        )


class TestEventStream:
    def test_stream_is_gapless_and_ends_after_outcome(self, service):
        manager, client = service
        sid = create_session(client)
        events = read_stream(client, sid)
        wait_done(manager, sid)
        seqs = [seq for seq, _ in events]
        assert seqs == list(range(len(seqs)))
        assert events[-1][1]["kind"] == "OUTCOME"
        kinds = {e["kind"] for _, e in events}
        assert "LLM_REQUEST" in kinds and "TOOL_CALL" in kinds

    def test_resumed_stream_misses_nothing_and_repeats_nothing(self, service):
        manager, client = service
        sid = create_session(client)
        wait_done(manager, sid)
        full = read_stream(client, sid)
        cut = len(full) // 2
        resumed = read_stream(client, sid, start=cut)
        assert [seq for seq, _ in resumed] == [seq for seq, _ in full[cut:]]
        assert [data for _, data in resumed] == [data for _, data in full[cut:]]

    def test_live_and_replayed_streams_agree(self, service):
        manager, client = service
        sid = create_session(client)
        live = read_stream(client, sid)
        wait_done(manager, sid)
        replayed = read_stream(client, sid)
        assert live == replayed


class TestAuth:
    def test_token_required_when_configured(self, tmp_path):
        manager = make_manager(tmp_path, token="sekrit")
        with TestClient(create_app(manager)) as client:
            bare = client.get("/sessions")
            assert bare.status_code == 401
            assert bare.json()["error"]["code"] == "AUTH_FAILED"

            wrong = client.get(
                "/sessions", headers={"Authorization": "Bearer nope"}
            )
            assert wrong.status_code == 401

            ok = client.get(
                "/sessions", headers={"Authorization": "Bearer sekrit"}
            )
            assert ok.status_code == 200
            assert ok.json() == {"sessions": []}


class TestCapacity:
    def test_full_house_returns_busy(self, tmp_path):
        manager = make_manager(tmp_path, max_sessions=1)
        with TestClient(create_app(manager)) as client:
            first = create_session(client, start_paused=True)
            refused = client.post("/sessions", json={"source_text": TASK_SOURCE})
            assert refused.status_code == 503
            assert refused.json()["error"]["code"] == "CAPACITY"

            client.post(f"/sessions/{first}/control", json={"action": "ABORT"})
            wait_done(manager, first)
            second = create_session(client)
            wait_done(manager, second)


class TestScriptedDirWiring:
    """The --scripted-dir launch path, by task id on disk."""

    def test_session_replays_the_matching_script(self, tmp_path):
        script_dir = tmp_path / "scripts"
        script_dir.mkdir()
        write_script(script_dir / "demo.axlog", happy_path_turns())
        manager = SessionManager(
            tmp_path / "state", scripted_factory(script_dir), stub_command()
        )
        with TestClient(create_app(manager)) as client:
            sid = create_session(client, task_id="demo")
            wait_done(manager, sid)
            summary = client.get(f"/sessions/{sid}").json()
            assert summary["status"] == "VERIFIED"

    def test_missing_script_aborts_instead_of_crashing(self, tmp_path):
        manager = SessionManager(
            tmp_path / "state", scripted_factory(tmp_path / "scripts"), stub_command()
        )
        with TestClient(create_app(manager)) as client:
            sid = create_session(client, task_id="absent")
            session = manager.get(sid)
            assert session.join(30.0)
            assert not session.error, session.error
            summary = client.get(f"/sessions/{sid}").json()
            assert summary["status"] == "ABORTED"
