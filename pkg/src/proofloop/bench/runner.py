"""Benchmark execution: many sessions, resumable, independently checked.

Each task runs in its own directory under the run directory:

    <run_root>/<run_id>/run.json            run header (entries, budget)
    <run_root>/<run_id>/<task_id>/work/     session sandbox
    <run_root>/<run_id>/<task_id>/session.axlog
    <run_root>/<run_id>/<task_id>/outcome.json   completion marker

``outcome.json`` is written atomically and is the single source of truth
for completion: a task with one is never re-run, which makes interrupted
runs resumable without double work.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from ..leantext import contains_incomplete_marker
from ..model import Budget, InvalidTask, SessionStatus, TheoremTask
from ..agents import run_task_session
from ..backend.providers import ChatBackend
from .dataset import BenchmarkManifest, DatasetEntry, load_task
from .report import RunReport, TaskRecord, load_run

DEFAULT_PARALLELISM = 4


class BenchConfigError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class CheckStatus(str, Enum):
    CORRECT = "CORRECT"
    INCORRECT_COMPILE = "INCORRECT_COMPILE"
    INCORRECT_MARKER = "INCORRECT_MARKER"
    SKIPPED = "SKIPPED"


@dataclass(frozen=True)
class ExternalCheck:
    status: CheckStatus
    detail: str = ""

    def to_dict(self) -> dict:
        return {"status": self.status.value, "detail": self.detail}


def _detect_compiler(project_root: Optional[Path]) -> Optional[list[str]]:
    if project_root is not None:
        has_lake_project = (project_root / "lakefile.lean").is_file() or (
            project_root / "lakefile.toml"
        ).is_file()
        if has_lake_project and shutil.which("lake"):
            return ["lake", "env", "lean"]
    if shutil.which("lean"):
        return ["lean"]
    return None


def external_check(
    file_path: Path | str,
    project_root: Optional[Path | str] = None,
    compiler: Optional[list[str]] = None,
    timeout: float = 600.0,
) -> ExternalCheck:
    """Re-validate a claimed proof outside the agent toolchain.

    The file must compile under a real compiler invocation and carry no
    incomplete-proof marker. With no compiler available the check is
    SKIPPED, never silently passed.
    """
    file_path = Path(file_path)
    root = Path(project_root) if project_root is not None else file_path.parent
    argv = compiler if compiler is not None else _detect_compiler(root)
    if not argv:
        return ExternalCheck(
            CheckStatus.SKIPPED, "no Lean compiler found for the independent check"
        )
    try:
        proc = subprocess.run(
            [*argv, str(file_path)],
            cwd=str(root),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as e:
        return ExternalCheck(CheckStatus.SKIPPED, f"compiler did not run: {e}")
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout).strip().splitlines()[-5:]
        return ExternalCheck(CheckStatus.INCORRECT_COMPILE, "\n".join(tail))
    text = file_path.read_text(encoding="utf-8")
    if contains_incomplete_marker(text):
        return ExternalCheck(
            CheckStatus.INCORRECT_MARKER, "file still carries an open obligation"
        )
    return ExternalCheck(CheckStatus.CORRECT)


def _atomic_write_json(path: Path, data: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_one(
    manifest: BenchmarkManifest,
    entry: DatasetEntry,
    run_dir: Path,
    budget: Budget,
    backend_factory: Callable[[TheoremTask], ChatBackend],
    server_command: Optional[list[str]],
    negation_probe: bool,
    check_compiler: Optional[list[str]],
    check_project_root: Optional[Path],
) -> None:
    task_dir = run_dir / entry.id
    task_dir.mkdir(parents=True, exist_ok=True)
    row: dict = {"task_id": entry.id, "split": entry.split, "rank": entry.rank}
    try:
        task = load_task(manifest, entry)
    except InvalidTask as e:
        row["status"] = "INVALID_TASK"
        row["note"] = str(e)
        _atomic_write_json(task_dir / "outcome.json", row)
        return
    outcome, _ = run_task_session(
        task,
        budget,
        backend_factory(task),
        task_dir / "work",
        server_command=server_command,
        session_id=entry.id,
        transcript_path=task_dir / "session.axlog",
        negation_probe=negation_probe,
    )
    row["status"] = outcome.status.value
    row["outcome"] = outcome.to_dict()
    if outcome.status is SessionStatus.VERIFIED:
        check = external_check(
            task_dir / "work" / "task.lean",
            project_root=check_project_root or (task_dir / "work"),
            compiler=check_compiler,
        )
        row["check"] = check.to_dict()
    _atomic_write_json(task_dir / "outcome.json", row)


def run_benchmark(
    manifest: BenchmarkManifest,
    run_root: Path | str,
    run_id: str,
    budget: Budget,
    backend_factory: Callable[[TheoremTask], ChatBackend],
    *,
    server_command: Optional[list[str]] = None,
    parallelism: int = DEFAULT_PARALLELISM,
    resume: bool = False,
    should_stop: Optional[Callable[[], bool]] = None,
    negation_probe: bool = False,
    check_compiler: Optional[list[str]] = None,
    check_project_root: Optional[Path | str] = None,
) -> RunReport:
    """Run every incomplete manifest task, then load the run report.

    A fresh run refuses an existing run directory (RUN_DIR_CONFLICT);
    pass ``resume=True`` to continue one, skipping tasks that already
    have an outcome file. ``should_stop`` is polled before each task
    starts, so an interrupted run stops cleanly between tasks.
    """
    if parallelism < 1:
        raise BenchConfigError("BAD_PARALLELISM", "parallelism must be at least 1")
    run_root = Path(run_root)
    run_dir = run_root / run_id
    if run_dir.exists() and not resume:
        raise BenchConfigError(
            "RUN_DIR_CONFLICT",
            f"run directory {run_dir} already exists; resume it or pick a new id",
        )
    run_dir.mkdir(parents=True, exist_ok=True)
    header = {
        "run_id": run_id,
        "manifest_name": manifest.name,
        "budget": budget.to_dict(),
        "entries": [
            {"id": e.id, "split": e.split, "rank": e.rank} for e in manifest.entries
        ],
    }
    _atomic_write_json(run_dir / "run.json", header)

    todo = [
        e for e in manifest.entries if not (run_dir / e.id / "outcome.json").exists()
    ]
    stop = should_stop or (lambda: False)

    def worker(entry: DatasetEntry) -> None:
        if stop():
            return
        _run_one(
            manifest,
            entry,
            run_dir,
            budget,
            backend_factory,
            server_command,
            negation_probe,
            check_compiler,
            Path(check_project_root) if check_project_root else None,
        )

    if parallelism == 1:
        for entry in todo:
            worker(entry)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            list(pool.map(worker, todo))
    return load_run(run_dir)
