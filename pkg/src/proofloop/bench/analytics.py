"""Run analytics: tool-usage aggregation and tactic vocabulary.

All aggregation arithmetic is exact (fractions.Fraction); rounding
happens only at render time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from ..leantext import extract_tactic_names
from ..transcript import EventKind, TranscriptEvent

# The closed tactic vocabulary tracked by reports, in report order.
TACTIC_NAMES = (
    "apply",
    "assumption",
    "by_cases",
    "calc",
    "cases",
    "change",
    "classical",
    "congr",
    "constructor",
    "contradiction",
    "decide",
    "exact",
    "exact_mod_cast",
    "exfalso",
    "ext",
    "funext",
    "generalize",
    "induction",
    "injection",
    "intro",
    "intros",
    "left",
    "native_decide",
    "norm_cast",
    "obtain",
    "omega",
    "push_cast",
    "rcases",
    "refine",
    "replace",
    "rfl",
    "right",
    "rintro",
    "rw",
    "rwa",
    "show",
    "simp",
    "simp_all",
    "simpa",
    "specialize",
    "subst",
    "subst_vars",
    "suffices",
    "trans",
    "unfold",
)


@dataclass(frozen=True)
class TacticVocabulary:
    """Closed set of tactic names a report may count.

    The default vocabulary has exactly 45 entries and is fixed at import
    time; building a custom vocabulary requires constructing a new value,
    there is no mutation path.
    """

    names: frozenset[str]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("vocabulary cannot be empty")

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def extract(self, proof_body: str) -> set[str]:
        return extract_tactic_names(proof_body, self.names)


DEFAULT_TACTIC_VOCABULARY = TacticVocabulary(frozenset(TACTIC_NAMES))


@dataclass(frozen=True)
class ToolUsageStats:
    """Per-tool call statistics over a set of sessions.

    ``mean_calls`` maps tool name to the exact average number of calls
    per session; ``success_rate`` maps tool name to the exact fraction
    of calls that succeeded (None when the tool was never called).
    """

    sessions: int
    total_calls: Counter
    successful_calls: Counter

    def mean_calls(self, tool: str) -> Fraction:
        if self.sessions == 0:
            raise ZeroDivisionError("no sessions aggregated")
        return Fraction(self.total_calls[tool], self.sessions)

    def success_rate(self, tool: str) -> Fraction | None:
        total = self.total_calls[tool]
        if total == 0:
            return None
        return Fraction(self.successful_calls[tool], total)

    def overall_mean(self) -> Fraction:
        if self.sessions == 0:
            raise ZeroDivisionError("no sessions aggregated")
        return Fraction(sum(self.total_calls.values()), self.sessions)

    def tools_by_usage(self) -> list[str]:
        """Tool names, most-called first, ties broken alphabetically."""
        return sorted(self.total_calls, key=lambda t: (-self.total_calls[t], t))


def aggregate_tool_usage(
    transcripts: Iterable[Iterable[TranscriptEvent]],
) -> ToolUsageStats:
    """Fold TOOL_CALL/TOOL_RESULT events of many sessions into stats.

    Each inner iterable is one session's event stream.  Success is read
    off the TOOL_RESULT paired with each call; a call with no result in
    the stream counts as failed.
    """
    sessions = 0
    total: Counter = Counter()
    succeeded: Counter = Counter()
    for events in transcripts:
        sessions += 1
        pending: dict[str, str] = {}
        for ev in events:
            if ev.kind is EventKind.TOOL_CALL:
                tool = ev.payload.get("tool", "")
                total[tool] += 1
                pending[ev.payload.get("call_id", "")] = tool
            elif ev.kind is EventKind.TOOL_RESULT:
                cid = ev.payload.get("call_id", "")
                tool = pending.pop(cid, ev.payload.get("tool", ""))
                if ev.payload.get("success"):
                    succeeded[tool] += 1
    return ToolUsageStats(sessions=sessions, total_calls=total, successful_calls=succeeded)


def format_fraction(value: Fraction | None, places: int = 2) -> str:
    """Fixed-point decimal rendering with round-half-up, or a dash."""
    if value is None:
        return "–"
    scaled = value * 10**places
    q = scaled.numerator // scaled.denominator
    rem = scaled - q
    if rem * 2 >= 1:
        q += 1
    text = str(q).rjust(places + 1, "0")
    return f"{text[:-places]}.{text[-places:]}" if places else text


def percent_round_half_up(solved: int, total: int) -> str:
    """Integer percent with exact half-up rounding; dash for empty cells."""
    if total == 0:
        return "–"
    pct = Fraction(solved * 100, total)
    q = pct.numerator // pct.denominator
    if (pct - q) * 2 >= 1:
        q += 1
    return str(q)


def render_tool_usage_table(stats: ToolUsageStats, top: int = 10) -> str:
    """Two-column table of the most used tools and their mean call counts."""
    rows = [("Tool", "Calls")]
    for tool in stats.tools_by_usage()[:top]:
        rows.append((tool, format_fraction(stats.mean_calls(tool))))
    width = max(len(r[0]) for r in rows)
    lines = [f"{name.ljust(width)}  {calls}" for name, calls in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def tactic_sets_table(tactic_sets: Mapping[str, set[str]]) -> str:
    """One row per run id listing its vocabulary tactics, sorted."""
    lines = []
    for run in sorted(tactic_sets):
        names = ", ".join(sorted(tactic_sets[run])) or "–"
        lines.append(f"{run}: {names}")
    return "\n".join(lines) + "\n"
