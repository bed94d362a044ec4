"""MCP client against the stub tool server: handshake, calls, failures."""

from __future__ import annotations

import json
import sys

import pytest

from proofloop.gateway import (
    CallTimeout,
    HandshakeTimeout,
    ProtocolMismatch,
    SpawnFailed,
    ToolchainUnavailable,
    ToolGateway,
    call_tool_wire,
    spawn_server,
)
from proofloop.transcript import EventKind, Transcript, validate_event_stream


def stub_command(fixture_path=None) -> list[str]:
    cmd = [sys.executable, "-m", "proofloop.gateway.stubserver"]
    if fixture_path is not None:
        cmd += ["--fixture", str(fixture_path)]
    return cmd


def write_fixture(tmp_path, data, name="stub.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


@pytest.fixture
def workdir(tmp_path):
    root = tmp_path / "work"
    root.mkdir()
    (root / "task.lean").write_text("theorem a : True := by sorry\n")
    return root


class TestSpawn:
    def test_handshake_and_tool_list(self, workdir):
        handle = spawn_server(stub_command(), cwd=str(workdir))
        try:
            assert handle.alive
            assert "lean_diagnostic_messages" in handle.tool_names()
            assert len(handle.tool_names()) == 14
        finally:
            handle.close()

    def test_spawn_failed_for_missing_binary(self):
        with pytest.raises(SpawnFailed):
            spawn_server(["/nonexistent/toolserver"])

    def test_spawn_failed_when_process_exits(self, tmp_path):
        fx = write_fixture(tmp_path, {"exit_on_start": True})
        with pytest.raises(SpawnFailed):
            spawn_server(stub_command(fx))

    def test_handshake_timeout(self, tmp_path):
        fx = write_fixture(tmp_path, {"no_initialize_reply": True})
        with pytest.raises(HandshakeTimeout):
            spawn_server(stub_command(fx), handshake_timeout=0.4)

    def test_protocol_mismatch(self, tmp_path):
        fx = write_fixture(tmp_path, {"protocol_version": "1999-01-01"})
        with pytest.raises(ProtocolMismatch):
            spawn_server(stub_command(fx))


class TestWireCalls:
    def test_fake_lean_diagnostics(self, workdir):
        handle = spawn_server(stub_command(), cwd=str(workdir))
        try:
            out = call_tool_wire(
                handle, "lean_diagnostic_messages", {"file": "task.lean"}, timeout=5
            )
            assert out.success
            diags = out.structured["diagnostics"]
            assert diags[0]["message"] == "declaration uses 'sorry'"
        finally:
            handle.close()

    def test_scripted_response_and_once(self, tmp_path, workdir):
        fx = write_fixture(
            tmp_path,
            {
                "responses": [
                    {"tool": "lean_goal", "text": "⊢ True", "once": True},
                    {"tool": "lean_goal", "text": "no goals"},
                ]
            },
        )
        handle = spawn_server(stub_command(fx), cwd=str(workdir))
        try:
            first = call_tool_wire(handle, "lean_goal", {"file": "task.lean", "line": 1}, 5)
            second = call_tool_wire(handle, "lean_goal", {"file": "task.lean", "line": 1}, 5)
            assert first.text == "⊢ True"
            assert second.text == "no goals"
        finally:
            handle.close()

    def test_is_error_result(self, tmp_path, workdir):
        fx = write_fixture(
            tmp_path,
            {"responses": [{"tool": "lean_loogle", "text": "service down", "is_error": True}]},
        )
        handle = spawn_server(stub_command(fx), cwd=str(workdir))
        try:
            out = call_tool_wire(handle, "lean_loogle", {"query": "x"}, 5)
            assert not out.success
            assert "service down" in out.error
        finally:
            handle.close()

    def test_call_timeout(self, tmp_path, workdir):
        fx = write_fixture(tmp_path, {"delays": {"lean_goal": 3.0}})
        handle = spawn_server(stub_command(fx), cwd=str(workdir))
        try:
            with pytest.raises(CallTimeout):
                call_tool_wire(handle, "lean_goal", {"file": "task.lean"}, timeout=0.3)
        finally:
            handle.close()


class TestToolGateway:
    def test_unknown_tool_never_forwarded(self, workdir):
        gw = ToolGateway(workdir, stub_command(), transcript=Transcript("s1"))
        try:
            record = gw.call("shell_exec", {"cmd": "rm -rf /"})
            assert not record.success
            assert record.error_code == "UNKNOWN_TOOL"
            events = gw.transcript.events()
            assert [e.kind for e in events] == [EventKind.TOOL_CALL, EventKind.TOOL_RESULT]
        finally:
            gw.close()

    def test_lean_call_parses_diagnostics(self, workdir):
        gw = ToolGateway(workdir, stub_command())
        try:
            record = gw.call("lean_diagnostic_messages", {"file": "task.lean"})
            assert record.success
            assert record.diagnostics is not None
            assert len(record.diagnostics) == 1
        finally:
            gw.close()

    def test_fs_call_snapshots_and_pairing(self, workdir):
        t = Transcript("s1")
        gw = ToolGateway(workdir, server_command=None, transcript=t)
        gw.call("write_file", {"path": "a.lean", "content": "theorem x : True := by sorry\n"})
        gw.call(
            "edit_file",
            {"path": "a.lean", "old_text": "by sorry", "new_text": "trivial"},
        )
        bad = gw.call("edit_file", {"path": "a.lean", "old_text": "zzz", "new_text": "q"})
        assert not bad.success and bad.error_code == "EDIT_AMBIGUOUS"
        events = t.events()
        validate_event_stream(events)
        snaps = [e for e in events if e.kind is EventKind.FILE_SNAPSHOT]
        assert [s.payload["op"] for s in snaps] == ["write_file", "edit_file"]
        assert snaps[1].payload["content"] == "theorem x : True := trivial\n"

    def test_path_escape_surfaces_as_failed_record(self, workdir):
        gw = ToolGateway(workdir, server_command=None)
        record = gw.call("read_file", {"path": "../../etc/passwd"})
        assert not record.success
        assert record.error_code == "PATH_ESCAPE"

    def test_server_death_respawns_then_succeeds(self, tmp_path, workdir):
        # Each stub process dies on its second lean_goal call; one death
        # triggers one respawn and the retried call succeeds.
        fx = write_fixture(tmp_path, {"die_on": {"lean_goal": 2}})
        gw = ToolGateway(workdir, stub_command(fx), transcript=Transcript("s1"))
        try:
            assert gw.call("lean_goal", {"file": "task.lean"}).success
            record = gw.call("lean_goal", {"file": "task.lean"})
            assert record.success
            assert gw.respawns_used == 1
            validate_event_stream(gw.transcript.events())
        finally:
            gw.close()

    def test_persistent_death_exhausts_respawns(self, tmp_path, workdir):
        fx = write_fixture(tmp_path, {"die_on": {"lean_goal": 1}})
        t = Transcript("s1")
        gw = ToolGateway(workdir, stub_command(fx), transcript=t)
        try:
            with pytest.raises(ToolchainUnavailable):
                gw.call("lean_goal", {"file": "task.lean"})
            # The event pair is still closed on the abort path.
            validate_event_stream(t.events())
        finally:
            gw.close()

    def test_timeout_is_failed_record_not_crash(self, tmp_path, workdir):
        fx = write_fixture(tmp_path, {"delays": {"lean_hover_info": 2.0}})
        gw = ToolGateway(workdir, stub_command(fx), call_timeout=0.3)
        try:
            record = gw.call("lean_hover_info", {"file": "task.lean", "line": 1, "column": 1})
            assert not record.success
            assert record.error_code == "CALL_TIMEOUT"
        finally:
            gw.close()

    def test_direct_read_write_not_counted_as_calls(self, workdir):
        t = Transcript("s1")
        gw = ToolGateway(workdir, server_command=None, transcript=t)
        gw.write_text("b.lean", "x := 1\n")
        assert gw.read_text("b.lean") == "x := 1\n"
        assert gw.calls_made == 0
        kinds = [e.kind for e in t.events()]
        assert kinds == [EventKind.FILE_SNAPSHOT]
