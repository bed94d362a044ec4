"""Run reports: loading completed runs and rendering result tables."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..transcript import read_transcript
from .analytics import (
    DEFAULT_TACTIC_VOCABULARY,
    aggregate_tool_usage,
    percent_round_half_up,
    render_tool_usage_table,
)

# Check results that disqualify a claimed proof.
_CONTRADICTED = {"INCORRECT_COMPILE", "INCORRECT_MARKER"}


@dataclass(frozen=True)
class TaskRecord:
    """One manifest entry's result inside a run, PENDING until finished."""

    task_id: str
    split: str
    rank: Optional[int]
    status: str
    api_calls_used: int = 0
    tool_calls_used: int = 0
    rounds_used: int = 0
    elapsed: float = 0.0
    check_status: str = ""
    check_detail: str = ""
    note: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "VERIFIED" and self.check_status not in _CONTRADICTED

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "split": self.split,
            "rank": self.rank,
            "status": self.status,
            "api_calls_used": self.api_calls_used,
            "tool_calls_used": self.tool_calls_used,
            "rounds_used": self.rounds_used,
            "elapsed": self.elapsed,
            "check_status": self.check_status,
            "check_detail": self.check_detail,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskRecord":
        return cls(
            task_id=d["task_id"],
            split=d.get("split", ""),
            rank=d.get("rank"),
            status=d["status"],
            api_calls_used=d.get("api_calls_used", 0),
            tool_calls_used=d.get("tool_calls_used", 0),
            rounds_used=d.get("rounds_used", 0),
            elapsed=d.get("elapsed", 0.0),
            check_status=d.get("check_status", ""),
            check_detail=d.get("check_detail", ""),
            note=d.get("note", ""),
        )


@dataclass(frozen=True)
class RunReport:
    """All task records of one run, in manifest order."""

    run_id: str
    manifest_name: str
    records: tuple[TaskRecord, ...]
    run_dir: Optional[Path] = None

    def splits(self) -> list[str]:
        seen: list[str] = []
        for r in self.records:
            if r.split not in seen:
                seen.append(r.split)
        return seen

    def split_counts(self) -> list[tuple[str, int, int]]:
        """(split, solved, total) per split, in manifest order."""
        out = []
        for split in self.splits():
            rows = [r for r in self.records if r.split == split]
            out.append((split, sum(1 for r in rows if r.solved), len(rows)))
        return out

    def completed(self) -> list[TaskRecord]:
        return [r for r in self.records if r.status != "PENDING"]

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "manifest_name": self.manifest_name,
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            run_id=d["run_id"],
            manifest_name=d.get("manifest_name", ""),
            records=tuple(TaskRecord.from_dict(r) for r in d.get("records", [])),
        )


def _record_from_row(header_entry: dict, row: Optional[dict]) -> TaskRecord:
    base = {
        "task_id": header_entry["id"],
        "split": header_entry.get("split", ""),
        "rank": header_entry.get("rank"),
    }
    if row is None:
        return TaskRecord(status="PENDING", **base)
    outcome = row.get("outcome") or {}
    check = row.get("check") or {}
    return TaskRecord(
        status=row.get("status", "PENDING"),
        api_calls_used=outcome.get("api_calls_used", 0),
        tool_calls_used=outcome.get("tool_calls_used", 0),
        rounds_used=outcome.get("rounds_used", 0),
        elapsed=outcome.get("elapsed", 0.0),
        check_status=check.get("status", ""),
        check_detail=check.get("detail", ""),
        note=row.get("note", "") or outcome.get("note", ""),
        **base,
    )


def load_run(run_dir: Path | str) -> RunReport:
    """Rebuild a report from a run directory's header and outcome files."""
    run_dir = Path(run_dir)
    header = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    records = []
    for entry in header.get("entries", []):
        outcome_path = run_dir / entry["id"] / "outcome.json"
        row = None
        if outcome_path.is_file():
            row = json.loads(outcome_path.read_text(encoding="utf-8"))
        records.append(_record_from_row(entry, row))
    return RunReport(
        run_id=header["run_id"],
        manifest_name=header.get("manifest_name", ""),
        records=tuple(records),
        run_dir=run_dir,
    )


def accuracy_table(report: RunReport) -> str:
    """Per-split solve counts and percentages, splits in manifest order.

    A split with no tasks renders a dash instead of a percentage.
    """
    rows = [("Split", "Solved", "Accuracy")]
    for split, solved, total in report.split_counts():
        pct = percent_round_half_up(solved, total)
        rows.append((split or "(none)", f"{solved}/{total}", pct if pct == "–" else f"{pct}%"))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"{a.ljust(w0)}  {b.ljust(w1)}  {c}" for a, b, c in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def tool_usage_table(report: RunReport, top: int = 10) -> str:
    """Mean tool calls per session across the run's transcripts."""
    if report.run_dir is None:
        raise ValueError("report was not loaded from a run directory")
    streams = []
    for record in report.completed():
        path = report.run_dir / record.task_id / "session.axlog"
        if path.is_file():
            streams.append(read_transcript(path, validate=False))
    stats = aggregate_tool_usage(streams)
    return render_tool_usage_table(stats, top=top)


def tactic_table(report: RunReport) -> str:
    """Tactics used by each solved task's final file, vocabulary-limited."""
    if report.run_dir is None:
        raise ValueError("report was not loaded from a run directory")
    lines = []
    for record in report.records:
        if not record.solved:
            continue
        path = report.run_dir / record.task_id / "work" / "task.lean"
        if not path.is_file():
            continue
        used = DEFAULT_TACTIC_VOCABULARY.extract(path.read_text(encoding="utf-8"))
        lines.append(f"{record.task_id}: {', '.join(sorted(used)) or '–'}")
    if not lines:
        lines.append("(no solved tasks)")
    return "\n".join(lines) + "\n"
