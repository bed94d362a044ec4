"""Benchmark harness: manifests, runner with resume, checks, reports."""

from __future__ import annotations

import json
import os
import sys

import pytest

from proofloop.backend import ScriptedBackend, ToolCallRequest, assistant, write_script
from proofloop.bench import (
    BenchConfigError,
    CheckStatus,
    ManifestError,
    accuracy_table,
    external_check,
    load_manifest,
    load_run,
    load_task,
    run_benchmark,
    tactic_table,
    tool_usage_table,
)
from proofloop.bench.cli import main as bench_main
from proofloop.model import Budget, InvalidTask

TASK_SOURCE = (
    "theorem demo (n : Nat) : n + 0 = n := by\n"
    "  sorry\n"
)

FINAL_PROOF = (
    "theorem demo (n : Nat) : n + 0 = n := by\n"
    "  have h1 : n + 0 = n := Nat.add_zero n\n"
    "  exact h1\n"
)

BROKEN_PROOF = (
    "theorem demo (n : Nat) : n + 0 = n := by\n"
    "  exact BROKEN\n"
)

TWO_THEOREMS = (
    "theorem a : True := by sorry\n"
    "theorem b : True := by sorry\n"
)


def stub_command() -> list[str]:
    return [sys.executable, "-m", "proofloop.gateway.stubserver"]


def write_turn(content, file_content, call_id):
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


def happy_turns():
    return [
        assistant("Scanning: theorem demo."),
        assistant("1. Apply Nat.add_zero."),
        assistant("have h1 : n + 0 = n := by sorry"),
        write_turn("Finishing.", FINAL_PROOF, "c1"),
    ]


def broken_turns():
    variant = BROKEN_PROOF.replace("exact BROKEN", "exact (BROKEN)")
    return [
        assistant("Scanning: theorem demo."),
        assistant("1. Try something."),
        assistant("have h1 : n + 0 = n := by sorry"),
        write_turn("Attempt one.", BROKEN_PROOF, "c1"),
        write_turn("Attempt two.", variant, "c2"),
    ]


def fake_compiler(tmp_path):
    """A stand-in compiler: fails exactly when the file contains BROKEN."""
    script = tmp_path / "fakecheck.py"
    script.write_text(
        "import sys\n"
        "text = open(sys.argv[-1], encoding='utf-8').read()\n"
        "sys.exit(1 if 'BROKEN' in text else 0)\n"
    )
    return [sys.executable, str(script)]


def write_manifest(root, entries, name="demo-bench", expected=None):
    root.mkdir(parents=True, exist_ok=True)
    data = {
        "name": name,
        "expected_count": expected if expected is not None else len(entries),
        "entries": entries,
    }
    (root / "manifest.json").write_text(json.dumps(data, indent=1))
    return root / "manifest.json"


@pytest.fixture
def bench_dir(tmp_path):
    root = tmp_path / "bench"
    root.mkdir()
    (root / "t1.lean").write_text(TASK_SOURCE)
    (root / "t3.lean").write_text(TASK_SOURCE)
    (root / "t4.lean").write_text(TWO_THEOREMS)
    return root


@pytest.fixture
def manifest_path(bench_dir):
    return write_manifest(
        bench_dir,
        [
            {"id": "t1", "path": "t1.lean", "split": "easy", "rank": 1},
            {"id": "t3", "path": "t3.lean", "split": "hard", "rank": 2},
            {"id": "t4", "path": "t4.lean", "split": "hard", "rank": 3},
        ],
    )


class TestManifest:
    def test_load_ok(self, manifest_path):
        m = load_manifest(manifest_path)
        assert m.name == "demo-bench"
        assert [e.id for e in m.entries] == ["t1", "t3", "t4"]
        assert m.splits() == ["easy", "hard"]

    def test_count_mismatch(self, bench_dir):
        p = write_manifest(
            bench_dir,
            [{"id": "t1", "path": "t1.lean", "split": "easy"}],
            expected=2,
        )
        with pytest.raises(ManifestError) as exc:
            load_manifest(p)
        assert exc.value.code == "COUNT_MISMATCH"

    def test_missing_file(self, bench_dir):
        p = write_manifest(
            bench_dir, [{"id": "tx", "path": "absent.lean", "split": "easy"}]
        )
        with pytest.raises(ManifestError) as exc:
            load_manifest(p)
        assert exc.value.code == "MISSING_FILE"

    def test_duplicate_id_rejected(self, bench_dir):
        p = write_manifest(
            bench_dir,
            [
                {"id": "t1", "path": "t1.lean", "split": "easy"},
                {"id": "t1", "path": "t3.lean", "split": "easy"},
            ],
        )
        with pytest.raises(ManifestError):
            load_manifest(p)

    def test_load_task_carries_metadata(self, manifest_path):
        m = load_manifest(manifest_path)
        task = load_task(m, m.entries[0])
        assert task.id == "t1"
        assert task.dataset == "demo-bench"
        assert task.split == "easy"
        assert task.difficulty_rank == 1
        with pytest.raises(InvalidTask):
            load_task(m, m.entries[2])


class TestExternalCheck:
    def test_correct(self, tmp_path):
        f = tmp_path / "ok.lean"
        f.write_text(FINAL_PROOF)
        check = external_check(f, compiler=fake_compiler(tmp_path))
        assert check.status is CheckStatus.CORRECT

    def test_incorrect_compile(self, tmp_path):
        f = tmp_path / "bad.lean"
        f.write_text(BROKEN_PROOF)
        check = external_check(f, compiler=fake_compiler(tmp_path))
        assert check.status is CheckStatus.INCORRECT_COMPILE

    def test_incorrect_marker(self, tmp_path):
        f = tmp_path / "open.lean"
        f.write_text(TASK_SOURCE)
        check = external_check(f, compiler=fake_compiler(tmp_path))
        assert check.status is CheckStatus.INCORRECT_MARKER

    def test_skipped_when_compiler_missing(self, tmp_path, monkeypatch):
        f = tmp_path / "ok.lean"
        f.write_text(FINAL_PROOF)
        monkeypatch.setattr("proofloop.bench.runner.shutil.which", lambda n: None)
        check = external_check(f)
        assert check.status is CheckStatus.SKIPPED
        assert check.detail

    def test_skipped_when_compiler_cannot_run(self, tmp_path):
        f = tmp_path / "ok.lean"
        f.write_text(FINAL_PROOF)
        check = external_check(f, compiler=["/nonexistent/compiler"])
        assert check.status is CheckStatus.SKIPPED


TURNS_BY_TASK = {
    "t1": happy_turns,
    "t2": happy_turns,
    "t3": broken_turns,
    "t5": happy_turns,
    "t6": happy_turns,
}


def make_factory(log=None):
    def factory(task):
        if log is not None:
            log.append(task.id)
        return ScriptedBackend(TURNS_BY_TASK[task.id]())

    return factory


class TestRunner:
    def run_demo(self, manifest_path, tmp_path, **kwargs):
        manifest = load_manifest(manifest_path)
        return run_benchmark(
            manifest,
            tmp_path / "runs",
            kwargs.pop("run_id", "r1"),
            Budget(max_refinement_rounds=2),
            kwargs.pop("factory", make_factory()),
            server_command=stub_command(),
            parallelism=kwargs.pop("parallelism", 2),
            check_compiler=fake_compiler(tmp_path),
            **kwargs,
        )

    def test_full_run(self, manifest_path, tmp_path):
        report = self.run_demo(manifest_path, tmp_path)
        by_id = {r.task_id: r for r in report.records}
        assert by_id["t1"].status == "VERIFIED"
        assert by_id["t1"].check_status == "CORRECT"
        assert by_id["t1"].solved
        assert by_id["t3"].status == "FAILED_ROUNDS"
        assert not by_id["t3"].solved
        assert by_id["t4"].status == "INVALID_TASK"
        run_dir = tmp_path / "runs" / "r1"
        assert (run_dir / "t1" / "outcome.json").is_file()
        assert (run_dir / "t1" / "session.axlog").is_file()
        assert (run_dir / "run.json").is_file()

    def test_run_dir_conflict(self, manifest_path, tmp_path):
        self.run_demo(manifest_path, tmp_path)
        with pytest.raises(BenchConfigError) as exc:
            self.run_demo(manifest_path, tmp_path)
        assert exc.value.code == "RUN_DIR_CONFLICT"

    def test_resume_skips_completed(self, manifest_path, tmp_path):
        self.run_demo(manifest_path, tmp_path)
        calls: list[str] = []
        report = self.run_demo(
            manifest_path, tmp_path, resume=True, factory=make_factory(calls)
        )
        assert calls == []
        assert len(report.completed()) == 3

    def test_interrupt_then_resume_is_idempotent(self, tmp_path):
        root = tmp_path / "bench4"
        root.mkdir()
        for tid in ("t1", "t2", "t5", "t6"):
            (root / f"{tid}.lean").write_text(TASK_SOURCE)
        manifest_path = write_manifest(
            root,
            [
                {"id": tid, "path": f"{tid}.lean", "split": "easy"}
                for tid in ("t1", "t2", "t5", "t6")
            ],
            name="four",
        )
        manifest = load_manifest(manifest_path)
        run_dir = tmp_path / "runs" / "part"

        def stop():
            return len(list(run_dir.glob("*/outcome.json"))) >= 2

        partial = run_benchmark(
            manifest,
            tmp_path / "runs",
            "part",
            Budget(),
            make_factory(),
            server_command=stub_command(),
            parallelism=1,
            should_stop=stop,
            check_compiler=fake_compiler(tmp_path),
        )
        done_after_stop = [r.task_id for r in partial.completed()]
        assert len(done_after_stop) == 2
        assert sum(1 for r in partial.records if r.status == "PENDING") == 2
        stamps = {
            tid: os.path.getmtime(run_dir / tid / "outcome.json")
            for tid in done_after_stop
        }

        calls: list[str] = []
        final = run_benchmark(
            manifest,
            tmp_path / "runs",
            "part",
            Budget(),
            make_factory(calls),
            server_command=stub_command(),
            parallelism=1,
            resume=True,
            check_compiler=fake_compiler(tmp_path),
        )
        assert sorted(calls) == sorted(
            set("t1 t2 t5 t6".split()) - set(done_after_stop)
        )
        for tid, stamp in stamps.items():
            assert os.path.getmtime(run_dir / tid / "outcome.json") == stamp
        assert all(r.status == "VERIFIED" for r in final.records)
        assert len(final.completed()) == 4

    def test_bad_parallelism(self, manifest_path, tmp_path):
        with pytest.raises(BenchConfigError):
            self.run_demo(manifest_path, tmp_path, parallelism=0)


class TestReportTables:
    @pytest.fixture
    def finished_run(self, manifest_path, tmp_path):
        manifest = load_manifest(manifest_path)
        run_benchmark(
            manifest,
            tmp_path / "runs",
            "rep",
            Budget(max_refinement_rounds=2),
            make_factory(),
            server_command=stub_command(),
            parallelism=2,
            check_compiler=fake_compiler(tmp_path),
        )
        return tmp_path / "runs" / "rep"

    def test_accuracy_table(self, finished_run):
        table = accuracy_table(load_run(finished_run))
        lines = table.splitlines()
        assert lines[0].startswith("Split")
        assert any("easy" in l and "1/1" in l and "100%" in l for l in lines)
        assert any("hard" in l and "0/2" in l and "0%" in l for l in lines)

    def test_tool_usage_table(self, finished_run):
        table = tool_usage_table(load_run(finished_run))
        assert "write_file" in table
        assert "lean_diagnostic_messages" in table

    def test_tactic_table(self, finished_run):
        table = tactic_table(load_run(finished_run))
        assert "t1: exact" in table

    def test_roundtrip_dict(self, finished_run):
        from proofloop.bench import RunReport

        report = load_run(finished_run)
        again = RunReport.from_dict(report.to_dict())
        assert [r.task_id for r in again.records] == [
            r.task_id for r in report.records
        ]
        assert [r.status for r in again.records] == [r.status for r in report.records]


class TestBenchCli:
    def write_scripts(self, tmp_path):
        d = tmp_path / "scripts"
        d.mkdir()
        write_script(d / "t1.axlog", happy_turns())
        write_script(d / "t3.axlog", broken_turns())
        return d

    def test_run_and_report(self, manifest_path, tmp_path, capsys):
        scripts = self.write_scripts(tmp_path)
        compiler = fake_compiler(tmp_path)
        code = bench_main(
            [
                "run",
                "--manifest",
                str(manifest_path),
                "--out",
                str(tmp_path / "runs"),
                "--run-id",
                "cli1",
                "--scripted-dir",
                str(scripts),
                "--stub-tools",
                "--rounds",
                "2",
                "--parallelism",
                "2",
                "--check-compiler",
                " ".join(compiler),
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "3/3 tasks completed" in out
        assert "easy" in out

        for table in ("accuracy", "tools", "tactics"):
            code = bench_main(
                [
                    "report",
                    "cli1",
                    "--out",
                    str(tmp_path / "runs"),
                    "--table",
                    table,
                ]
            )
            assert code == 0
        tactics_out = capsys.readouterr().out
        assert "t1: exact" in tactics_out

    def test_report_missing_run(self, tmp_path, capsys):
        code = bench_main(
            ["report", "ghost", "--out", str(tmp_path / "runs")]
        )
        assert code == 2
        assert "no run found" in capsys.readouterr().err

    def test_run_manifest_error(self, bench_dir, tmp_path, capsys):
        p = write_manifest(
            bench_dir,
            [{"id": "t1", "path": "t1.lean", "split": "easy"}],
            expected=9,
        )
        code = bench_main(
            [
                "run",
                "--manifest",
                str(p),
                "--out",
                str(tmp_path / "runs"),
                "--scripted-dir",
                str(tmp_path),
            ]
        )
        assert code == 2
        assert "COUNT_MISMATCH" in capsys.readouterr().err
