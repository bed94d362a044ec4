"""Session phase machine and the step bookkeeping that rides along with it.

A proof session walks a fixed pipeline: scan the file for targets, sketch
a plan, formalize the plan as marker-bearing steps, discharge the steps,
then verify.  Verification either ends the session or produces feedback
that sends the prover back to work.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class SessionPhase(str, enum.Enum):
    ASSIGNED = "ASSIGNED"
    SCANNING = "SCANNING"
    SKETCHING = "SKETCHING"
    FORMALIZING = "FORMALIZING"
    STEP_PROVING = "STEP_PROVING"
    VERIFYING = "VERIFYING"
    FEEDBACK = "FEEDBACK"
    TERMINAL = "TERMINAL"


# Phases in which the prover agent takes chat turns.
PROVER_PHASES = frozenset(
    {
        SessionPhase.SCANNING,
        SessionPhase.SKETCHING,
        SessionPhase.FORMALIZING,
        SessionPhase.STEP_PROVING,
    }
)

# The forward chain; used by the fast path when a file needs no proving.
NEXT_PHASE = {
    SessionPhase.ASSIGNED: SessionPhase.SCANNING,
    SessionPhase.SCANNING: SessionPhase.SKETCHING,
    SessionPhase.SKETCHING: SessionPhase.FORMALIZING,
    SessionPhase.FORMALIZING: SessionPhase.STEP_PROVING,
    SessionPhase.STEP_PROVING: SessionPhase.VERIFYING,
}

LEGAL_TRANSITIONS = frozenset(
    {
        (SessionPhase.ASSIGNED, SessionPhase.SCANNING),
        (SessionPhase.SCANNING, SessionPhase.SKETCHING),
        (SessionPhase.SKETCHING, SessionPhase.FORMALIZING),
        (SessionPhase.FORMALIZING, SessionPhase.STEP_PROVING),
        (SessionPhase.STEP_PROVING, SessionPhase.VERIFYING),
        (SessionPhase.VERIFYING, SessionPhase.TERMINAL),
        (SessionPhase.VERIFYING, SessionPhase.FEEDBACK),
        (SessionPhase.FEEDBACK, SessionPhase.STEP_PROVING),
        # Full restart after repeated identical failures.
        (SessionPhase.FEEDBACK, SessionPhase.SKETCHING),
    }
)


class IllegalTransition(RuntimeError):
    """A phase change outside the documented relation was attempted."""


def check_transition(current: SessionPhase, to: SessionPhase) -> None:
    """Raise unless current -> to is a legal phase change.

    Any phase may jump straight to TERMINAL: that is the abort edge taken
    when a budget trips or the session is cancelled mid-flight.
    """
    if to is SessionPhase.TERMINAL:
        return
    if (current, to) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(f"illegal phase change {current.value} -> {to.value}")


class StepStatus(str, enum.Enum):
    PLANNED = "PLANNED"
    FORMALIZED = "FORMALIZED"
    PROVEN = "PROVEN"
    BLOCKED = "BLOCKED"


_STEP_EDGES = frozenset(
    {
        (StepStatus.PLANNED, StepStatus.FORMALIZED),
        (StepStatus.FORMALIZED, StepStatus.PROVEN),
        (StepStatus.FORMALIZED, StepStatus.BLOCKED),
        (StepStatus.BLOCKED, StepStatus.FORMALIZED),
    }
)


@dataclass
class SketchStep:
    """One planned step of a proof sketch.

    Starts as a prose description, acquires formal text when the skeleton
    is built, and is marked proven once its marker is discharged.
    """

    index: int
    description: str
    formal_text: str = ""
    status: StepStatus = StepStatus.PLANNED

    def to_status(self, new: StepStatus) -> None:
        if (self.status, new) not in _STEP_EDGES:
            raise ValueError(f"illegal step change {self.status.value} -> {new.value}")
        self.status = new


@dataclass(frozen=True)
class FeedbackNote:
    """What the verifier hands back after a failed round."""

    round: int
    summary: str
    error_count: int
    marker_count: int
    origin: str = "verifier"

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "summary": self.summary,
            "error_count": self.error_count,
            "marker_count": self.marker_count,
            "origin": self.origin,
        }


@dataclass
class ProofState:
    """Mutable per-session working state threaded through the loop."""

    phase: SessionPhase = SessionPhase.ASSIGNED
    sketch: list[SketchStep] = field(default_factory=list)
    targets: list[str] = field(default_factory=list)
    rounds_used: int = 0
    last_feedback_summary: str | None = None
    needs_prover_turn: bool = False
