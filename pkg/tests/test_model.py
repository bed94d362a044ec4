"""Core value types: verdicts, budgets, tasks, outcomes."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from proofloop.model import (
    Budget,
    BudgetExceeded,
    CallMeter,
    Diagnostic,
    InvalidTask,
    SessionOutcome,
    SessionStatus,
    Severity,
    TheoremTask,
    Verdict,
    VerdictReason,
)

LEAN = Path(__file__).parent / "fixtures" / "lean"


def diag(sev: Severity, msg: str = "m") -> Diagnostic:
    return Diagnostic(severity=sev, message=msg, file="f.lean")


class TestVerdict:
    def test_clean_judgement(self):
        v = Verdict.judge([], marker_present=False)
        assert v.verified
        assert v.reasons == (VerdictReason.CLEAN,)

    def test_error_diag_blocks(self):
        v = Verdict.judge([diag(Severity.ERROR)], marker_present=False)
        assert not v.verified
        assert v.reasons == (VerdictReason.HAS_ERROR_DIAGNOSTIC,)

    def test_incomplete_diag_alone_does_not_block(self):
        # A warning-weight diagnostic without a marker in the file is
        # not by itself a failure cause.
        v = Verdict.judge([diag(Severity.INCOMPLETE)], marker_present=False)
        assert v.verified

    def test_marker_blocks(self):
        v = Verdict.judge([], marker_present=True)
        assert v.reasons == (VerdictReason.HAS_INCOMPLETE_MARKER,)

    def test_compile_failure_blocks(self):
        v = Verdict.judge([], marker_present=False, compile_failed=True)
        assert v.reasons == (VerdictReason.COMPILE_FAILED,)

    def test_reason_accumulation(self):
        v = Verdict.judge(
            [diag(Severity.ERROR), diag(Severity.INCOMPLETE)], marker_present=True
        )
        assert set(v.reasons) == {
            VerdictReason.HAS_ERROR_DIAGNOSTIC,
            VerdictReason.HAS_INCOMPLETE_MARKER,
        }

    def test_verified_flag_must_match_reasons(self):
        with pytest.raises(ValueError):
            Verdict(verified=True, reasons=(VerdictReason.HAS_ERROR_DIAGNOSTIC,))
        with pytest.raises(ValueError):
            Verdict(verified=False, reasons=(VerdictReason.CLEAN,))
        with pytest.raises(ValueError):
            Verdict(
                verified=False,
                reasons=(VerdictReason.CLEAN, VerdictReason.HAS_INCOMPLETE_MARKER),
            )

    def test_roundtrip(self):
        v = Verdict.judge([diag(Severity.ERROR, "boom")], True, checked_path="a.lean")
        assert Verdict.from_dict(v.to_dict()) == v


class TestBudget:
    def test_defaults(self):
        b = Budget()
        assert b.max_api_calls == 200
        assert b.wall_clock_limit == 1500.0
        assert b.max_refinement_rounds == 5

    def test_hard_mode(self):
        b = Budget.hard_mode()
        assert b.max_api_calls == 400
        assert math.isinf(b.wall_clock_limit)
        assert b.max_refinement_rounds == 5

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"max_api_calls": 0},
            {"max_api_calls": -1},
            {"wall_clock_limit": 0.0},
            {"wall_clock_limit": -5.0},
            {"max_refinement_rounds": 0},
        ],
    )
    def test_limits_strictly_positive(self, kwargs):
        with pytest.raises(ValueError):
            Budget(**kwargs)

    def test_roundtrip_with_infinity(self):
        b = Budget.hard_mode()
        assert Budget.from_dict(b.to_dict()) == b
        assert b.to_dict()["wall_clock_limit"] is None


class TestTheoremTask:
    def test_from_source_splits(self):
        text = (LEAN / "dihedral_order_two.lean").read_text(encoding="utf-8")
        task = TheoremTask.from_source("aa-3", "dihedral_order_two.lean", text)
        assert task.preamble + task.statement == text
        assert task.statement.startswith("theorem exercise_3_part1")

    def test_from_source_rejects_closed_proof(self):
        with pytest.raises(InvalidTask):
            TheoremTask.from_source("t", "x.lean", "theorem a : 1 = 1 := rfl\n")

    def test_from_source_rejects_no_theorem(self):
        with pytest.raises(InvalidTask):
            TheoremTask.from_source("t", "x.lean", "def a : Nat := 1\n")

    def test_roundtrip(self):
        text = (LEAN / "qt_eigenstate.lean").read_text(encoding="utf-8")
        task = TheoremTask.from_source("qt-366", "qt.lean", text, dataset="qt", split="hard")
        assert TheoremTask.from_dict(task.to_dict()) == task


class TestSessionOutcome:
    def _verified(self) -> Verdict:
        return Verdict.judge([], marker_present=False)

    def test_verified_requires_verified_verdict(self):
        with pytest.raises(ValueError):
            SessionOutcome(SessionStatus.VERIFIED, None, 1, 1, 1, 0.5)
        ok = SessionOutcome(SessionStatus.VERIFIED, self._verified(), 1, 1, 1, 0.5)
        assert ok.status is SessionStatus.VERIFIED

    def test_failed_cannot_carry_verified_verdict(self):
        with pytest.raises(ValueError):
            SessionOutcome(
                SessionStatus.FAILED_ROUNDS, self._verified(), 1, 1, 1, 0.5
            )

    def test_roundtrip(self):
        out = SessionOutcome(
            SessionStatus.FAILED_BUDGET_CALLS,
            Verdict.judge([diag(Severity.ERROR)], False),
            api_calls_used=3,
            tool_calls_used=7,
            rounds_used=1,
            elapsed=2.25,
            note="ran out",
        )
        assert SessionOutcome.from_dict(out.to_dict()) == out


class TestCallMeter:
    def test_acquire_until_limit(self):
        m = CallMeter(limit=2)
        m.acquire()
        m.acquire()
        assert m.used == 2
        assert m.remaining == 0
        with pytest.raises(BudgetExceeded):
            m.acquire()
        assert m.used == 2
