"""Benchmark manifests: which theorem files make up a run.

A manifest is a JSON file listing task entries with their split labels.
Entry paths are resolved relative to the manifest's own directory, so a
benchmark directory can be moved as a unit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..model import TheoremTask


class ManifestError(ValueError):
    """A manifest that cannot back a benchmark run."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    path: str
    split: str
    rank: Optional[int] = None


@dataclass(frozen=True)
class BenchmarkManifest:
    name: str
    expected_count: int
    entries: tuple[DatasetEntry, ...]
    root: Path

    def splits(self) -> list[str]:
        """Split labels in first-appearance order."""
        seen: list[str] = []
        for e in self.entries:
            if e.split not in seen:
                seen.append(e.split)
        return seen

    def entry_path(self, entry: DatasetEntry) -> Path:
        return self.root / entry.path


def load_manifest(path: Path | str) -> BenchmarkManifest:
    """Read and validate a manifest file.

    Raises ManifestError with code COUNT_MISMATCH when the entry list
    does not match the declared count, and MISSING_FILE when any listed
    task file does not exist.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError("UNREADABLE", f"cannot load manifest {path}: {e}") from e
    for key in ("name", "expected_count", "entries"):
        if key not in data:
            raise ManifestError("UNREADABLE", f"manifest {path} lacks {key!r}")
    entries = []
    seen_ids = set()
    for raw in data["entries"]:
        entry = DatasetEntry(
            id=str(raw["id"]),
            path=str(raw["path"]),
            split=str(raw.get("split", "")),
            rank=raw.get("rank"),
        )
        if entry.id in seen_ids:
            raise ManifestError("UNREADABLE", f"duplicate task id {entry.id!r}")
        seen_ids.add(entry.id)
        entries.append(entry)
    manifest = BenchmarkManifest(
        name=str(data["name"]),
        expected_count=int(data["expected_count"]),
        entries=tuple(entries),
        root=path.parent,
    )
    if len(manifest.entries) != manifest.expected_count:
        raise ManifestError(
            "COUNT_MISMATCH",
            f"manifest {manifest.name} declares {manifest.expected_count} tasks "
            f"but lists {len(manifest.entries)}",
        )
    for entry in manifest.entries:
        if not manifest.entry_path(entry).is_file():
            raise ManifestError(
                "MISSING_FILE", f"task file {entry.path} for {entry.id} is missing"
            )
    return manifest


def load_task(manifest: BenchmarkManifest, entry: DatasetEntry) -> TheoremTask:
    """Materialize one manifest entry as a proving task.

    InvalidTask propagates when the file does not hold exactly one open
    theorem; the runner records that per task instead of dying.
    """
    source = manifest.entry_path(entry).read_text(encoding="utf-8")
    return TheoremTask.from_source(
        id=entry.id,
        source_path=str(manifest.entry_path(entry)),
        source_text=source,
        dataset=manifest.name,
        split=entry.split,
        difficulty_rank=entry.rank,
    )
