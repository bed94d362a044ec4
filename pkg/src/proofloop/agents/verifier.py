"""Deterministic verification of a proof file.

Verification is a fixed procedure, not an agent turn: read the file,
scan for open obligations, ask the toolchain for diagnostics exactly
once, and judge. No edits happen here.
"""

from __future__ import annotations

from ..gateway import ToolGateway
from ..leantext import contains_incomplete_marker, iter_incomplete_markers
from ..model import Diagnostic, Severity, Verdict, VerdictReason

# Diagnostic payloads that cannot be parsed are treated as an error:
# an unreadable compiler report never counts as a clean build.
_UNPARSEABLE_MESSAGE = "diagnostic payload could not be parsed"


def verify(gateway: ToolGateway, file_name: str) -> Verdict:
    """Judge the current state of ``file_name``.

    Performs exactly one lean_diagnostic_messages call. A failed tool
    call is judged as a failed compile rather than raised, so a broken
    build surfaces as a verdict the session loop can route.
    """
    text = gateway.read_text(file_name)
    marker = contains_incomplete_marker(text)
    record = gateway.call("lean_diagnostic_messages", {"file": file_name})
    if not record.success:
        return Verdict.judge(
            (), marker_present=marker, checked_path=file_name, compile_failed=True
        )
    if record.parse_error:
        diags: tuple[Diagnostic, ...] = (
            Diagnostic(
                severity=Severity.ERROR,
                message=_UNPARSEABLE_MESSAGE,
                file=file_name,
                start_line=0,
                start_col=0,
                end_line=0,
                end_col=0,
            ),
        )
    else:
        diags = record.diagnostics or ()
    return Verdict.judge(diags, marker_present=marker, checked_path=file_name)


def render_feedback_summary(verdict: Verdict, file_text: str) -> str:
    """Describe a failed verdict for the prover.

    Every error diagnostic appears exactly once (message and position),
    followed by the location of each remaining open obligation.
    Positions are reported one-based for human readers.
    """
    lines: list[str] = []
    if VerdictReason.COMPILE_FAILED in verdict.reasons:
        lines.append("the compile step failed outright")
    seen: set[tuple[str, int, int]] = set()
    for d in verdict.diagnostics:
        if d.severity is not Severity.ERROR:
            continue
        key = (d.message, d.start_line, d.start_col)
        if key in seen:
            continue
        seen.add(key)
        lines.append(
            f"error at line {d.start_line + 1}, col {d.start_col + 1}: {d.message}"
        )
    for hit in iter_incomplete_markers(file_text):
        lines.append(
            f"open obligation ({hit.token}) at line {hit.line + 1}, col {hit.col + 1}"
        )
    if not lines:
        lines.append("verification failed with no reportable detail")
    return "\n".join(lines)
