"""Agent loop that drives LLM provers against Lean tooling until proofs verify."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Budget,
    BudgetExceeded,
    Diagnostic,
    InvalidTask,
    SessionOutcome,
    SessionStatus,
    Severity,
    TheoremTask,
    Verdict,
    VerdictReason,
)
