"""Core value types shared by every layer.

All types here are immutable dataclasses with plain-dict serialization so
they can travel through transcripts, reports, and the HTTP service without
custom encoders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Optional

from .leantext import contains_incomplete_marker, split_task_source


class Severity(IntEnum):
    """Diagnostic weight on the three-point scale used throughout.

    NONE means a clean result, ERROR a wrong or broken proof, INCOMPLETE a
    proof that elaborates but is unfinished (sorry, warning, linter).
    """

    NONE = 0
    ERROR = 1
    INCOMPLETE = 2


class VerdictReason(str, Enum):
    HAS_ERROR_DIAGNOSTIC = "HAS_ERROR_DIAGNOSTIC"
    HAS_INCOMPLETE_MARKER = "HAS_INCOMPLETE_MARKER"
    COMPILE_FAILED = "COMPILE_FAILED"
    CLEAN = "CLEAN"


class SessionStatus(str, Enum):
    VERIFIED = "VERIFIED"
    FAILED_BUDGET_CALLS = "FAILED_BUDGET_CALLS"
    FAILED_BUDGET_TIME = "FAILED_BUDGET_TIME"
    FAILED_ROUNDS = "FAILED_ROUNDS"
    ABORTED = "ABORTED"
    ILL_POSED_DETECTED = "ILL_POSED_DETECTED"


@dataclass(frozen=True)
class Diagnostic:
    """One compiler/server message, positions zero-based."""

    severity: Severity
    message: str
    file: str = ""
    start_line: int = 0
    start_col: int = 0
    end_line: int = 0
    end_col: int = 0
    source_tag: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "severity": int(self.severity),
            "message": self.message,
            "file": self.file,
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
            "source_tag": self.source_tag,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Diagnostic":
        return cls(
            severity=Severity(d["severity"]),
            message=d["message"],
            file=d.get("file", ""),
            start_line=d.get("start_line", 0),
            start_col=d.get("start_col", 0),
            end_line=d.get("end_line", 0),
            end_col=d.get("end_col", 0),
            source_tag=d.get("source_tag", ""),
        )


@dataclass(frozen=True)
class Verdict:
    """Outcome of one verification pass over one file.

    ``verified`` is true exactly when ``reasons == (CLEAN,)``; the
    constructor enforces the equivalence so no caller can produce a
    verdict that claims success while also recording a failure cause.
    """

    verified: bool
    reasons: tuple[VerdictReason, ...]
    diagnostics: tuple[Diagnostic, ...] = ()
    checked_path: str = ""

    def __post_init__(self) -> None:
        if not self.reasons:
            raise ValueError("verdict requires at least one reason")
        clean = self.reasons == (VerdictReason.CLEAN,)
        if self.verified != clean:
            raise ValueError("verified flag must match reasons")
        if not self.verified and VerdictReason.CLEAN in self.reasons:
            raise ValueError("CLEAN cannot appear alongside failure reasons")

    @classmethod
    def judge(
        cls,
        diagnostics: tuple[Diagnostic, ...] | list[Diagnostic],
        marker_present: bool,
        checked_path: str = "",
        compile_failed: bool = False,
    ) -> "Verdict":
        """Fold diagnostics plus the marker scan into a verdict.

        A proof verifies only when compilation produced no severity-1
        diagnostic and the file carries no incomplete-proof marker.
        """
        diags = tuple(diagnostics)
        reasons: list[VerdictReason] = []
        if compile_failed:
            reasons.append(VerdictReason.COMPILE_FAILED)
        if any(d.severity == Severity.ERROR for d in diags):
            reasons.append(VerdictReason.HAS_ERROR_DIAGNOSTIC)
        if marker_present:
            reasons.append(VerdictReason.HAS_INCOMPLETE_MARKER)
        if not reasons:
            return cls(True, (VerdictReason.CLEAN,), diags, checked_path)
        return cls(False, tuple(reasons), diags, checked_path)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verified": self.verified,
            "reasons": [r.value for r in self.reasons],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "checked_path": self.checked_path,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Verdict":
        return cls(
            verified=d["verified"],
            reasons=tuple(VerdictReason(r) for r in d["reasons"]),
            diagnostics=tuple(Diagnostic.from_dict(x) for x in d["diagnostics"]),
            checked_path=d.get("checked_path", ""),
        )


@dataclass(frozen=True)
class Budget:
    """Per-session resource limits.  All limits are strictly positive;
    an unlimited wall clock is expressed as infinity."""

    max_api_calls: int = 200
    wall_clock_limit: float = 1500.0
    max_refinement_rounds: int = 5

    def __post_init__(self) -> None:
        if self.max_api_calls <= 0:
            raise ValueError("max_api_calls must be positive")
        if not (self.wall_clock_limit > 0):
            raise ValueError("wall_clock_limit must be positive")
        if self.max_refinement_rounds <= 0:
            raise ValueError("max_refinement_rounds must be positive")

    @classmethod
    def hard_mode(cls) -> "Budget":
        """Preset for the hardest benchmark split: twice the call budget
        and no wall-clock limit."""
        return cls(max_api_calls=400, wall_clock_limit=math.inf)

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_api_calls": self.max_api_calls,
            "wall_clock_limit": (
                None if math.isinf(self.wall_clock_limit) else self.wall_clock_limit
            ),
            "max_refinement_rounds": self.max_refinement_rounds,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Budget":
        wall = d.get("wall_clock_limit", 1500.0)
        return cls(
            max_api_calls=d.get("max_api_calls", 200),
            wall_clock_limit=math.inf if wall is None else wall,
            max_refinement_rounds=d.get("max_refinement_rounds", 5),
        )


class InvalidTask(ValueError):
    """A task file that does not contain exactly one open theorem."""


@dataclass(frozen=True)
class TheoremTask:
    """One theorem to prove: a file split into preamble and statement."""

    id: str
    source_path: str
    preamble: str
    statement: str
    dataset: str = ""
    split: str = ""
    difficulty_rank: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidTask("task id must be nonempty")
        if not self.statement.strip():
            raise InvalidTask("task statement must be nonempty")

    @property
    def source_text(self) -> str:
        return self.preamble + self.statement

    @classmethod
    def from_source(
        cls,
        id: str,
        source_path: str,
        source_text: str,
        dataset: str = "",
        split: str = "",
        difficulty_rank: Optional[int] = None,
    ) -> "TheoremTask":
        """Build a task from a file body.

        The file must contain exactly one theorem declaration and that
        declaration must still carry an incomplete-proof marker; anything
        else is not a provable assignment.
        """
        try:
            preamble, statement = split_task_source(source_text)
        except ValueError as e:
            raise InvalidTask(str(e)) from e
        if not contains_incomplete_marker(statement):
            raise InvalidTask(f"task {id} has no open proof obligation")
        return cls(
            id=id,
            source_path=source_path,
            preamble=preamble,
            statement=statement,
            dataset=dataset,
            split=split,
            difficulty_rank=difficulty_rank,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "source_path": self.source_path,
            "preamble": self.preamble,
            "statement": self.statement,
            "dataset": self.dataset,
            "split": self.split,
            "difficulty_rank": self.difficulty_rank,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TheoremTask":
        return cls(
            id=d["id"],
            source_path=d["source_path"],
            preamble=d["preamble"],
            statement=d["statement"],
            dataset=d.get("dataset", ""),
            split=d.get("split", ""),
            difficulty_rank=d.get("difficulty_rank"),
        )


@dataclass(frozen=True)
class SessionOutcome:
    """Terminal record of one proving session."""

    status: SessionStatus
    final_verdict: Optional[Verdict]
    api_calls_used: int
    tool_calls_used: int
    rounds_used: int
    elapsed: float
    note: str = ""

    def __post_init__(self) -> None:
        if self.status is SessionStatus.VERIFIED:
            if self.final_verdict is None or not self.final_verdict.verified:
                raise ValueError("VERIFIED outcome requires a verified verdict")
        elif self.final_verdict is not None and self.final_verdict.verified:
            raise ValueError("non-VERIFIED outcome cannot carry a verified verdict")
        if min(self.api_calls_used, self.tool_calls_used, self.rounds_used) < 0:
            raise ValueError("usage counters cannot be negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "final_verdict": (
                None if self.final_verdict is None else self.final_verdict.to_dict()
            ),
            "api_calls_used": self.api_calls_used,
            "tool_calls_used": self.tool_calls_used,
            "rounds_used": self.rounds_used,
            "elapsed": self.elapsed,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SessionOutcome":
        fv = d.get("final_verdict")
        return cls(
            status=SessionStatus(d["status"]),
            final_verdict=None if fv is None else Verdict.from_dict(fv),
            api_calls_used=d["api_calls_used"],
            tool_calls_used=d["tool_calls_used"],
            rounds_used=d["rounds_used"],
            elapsed=d["elapsed"],
            note=d.get("note", ""),
        )


@dataclass
class CallMeter:
    """Shared API-call counter for a session (and any probe sub-session)."""

    limit: int
    used: int = 0
    _ledger: list[str] = field(default_factory=list, repr=False)

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.used)

    def acquire(self, label: str = "") -> None:
        if self.used >= self.limit:
            raise BudgetExceeded(f"api call budget of {self.limit} exhausted")
        self.used += 1
        self._ledger.append(label)


class BudgetExceeded(RuntimeError):
    """Raised before sending a request that would cross the call budget."""
