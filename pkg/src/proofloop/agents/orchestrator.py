"""The session loop: drives a prover through the phase pipeline.

One call to ``run_session`` owns one theorem from assignment to a
terminal outcome.  The orchestrator takes no creative decisions itself:
it sequences prover turns, enforces budgets at turn boundaries, runs the
deterministic verifier, routes feedback, and (when enabled) forks a
negation probe if the prover claims the statement cannot hold.
"""

from __future__ import annotations

import time
from pathlib import Path
from typing import Any, Callable, Optional, Protocol

from ..backend.chat import ChatClient
from ..backend.messages import ChatMessage, system, tool_result, user
from ..backend.providers import ChatBackend, ProviderError
from ..gateway import ServerFailure, ToolchainUnavailable, ToolGateway
from ..leantext import (
    contains_incomplete_marker,
    count_incomplete_markers,
    find_theorem_declarations,
    negate_theorem_in_file,
)
from ..model import (
    Budget,
    BudgetExceeded,
    CallMeter,
    SessionOutcome,
    SessionStatus,
    TheoremTask,
    Verdict,
)
from ..transcript import EventKind, Transcript
from .phases import (
    NEXT_PHASE,
    PROVER_PHASES,
    FeedbackNote,
    ProofState,
    SessionPhase,
    SketchStep,
    StepStatus,
    check_transition,
)
from .prover import (
    build_skeleton,
    detect_ill_posed_claim,
    extract_have_lines,
    load_prompt,
    parse_sketch_steps,
    phase_guidance,
)
from .verifier import render_feedback_summary, verify

TASK_FILE_NAME = "task.lean"
PROBE_FILE_NAME = "negation.lean"


class AbortRequested(RuntimeError):
    """An operator asked the session to stop."""


class SessionControls(Protocol):
    """Operator-side hooks polled at every turn boundary.

    ``checkpoint`` may block (pause), may raise AbortRequested, and
    returns any hint texts queued since the last boundary.
    """

    def checkpoint(self) -> list[str]: ...


class _IllPosedDetected(Exception):
    """Internal signal: the negation probe verified the negated goal."""

    def __init__(self, probe_session_id: str):
        super().__init__(probe_session_id)
        self.probe_session_id = probe_session_id


class _Runner:
    def __init__(
        self,
        task: TheoremTask,
        budget: Budget,
        backend: ChatBackend,
        gateway: ToolGateway,
        transcript: Transcript,
        meter: Optional[CallMeter],
        controls: Optional[SessionControls],
        negation_probe: bool,
        file_name: str,
        session_id: str,
        clock: Callable[[], float],
        probe_depth: int,
    ):
        self.task = task
        self.budget = budget
        self.backend = backend
        self.gateway = gateway
        self.transcript = transcript
        self.meter = meter if meter is not None else CallMeter(budget.max_api_calls)
        self.chat = ChatClient(backend, self.meter, transcript)
        self.controls = controls
        self.negation_probe = negation_probe
        self.file_name = file_name
        self.session_id = session_id
        self.clock = clock
        self.probe_depth = probe_depth
        self.state = ProofState()
        self.history: list[ChatMessage] = []
        self.last_verdict: Optional[Verdict] = None
        self.start = clock()
        self._last_prompted_phase: Optional[SessionPhase] = None
        self._tools = [d.to_wire() for d in gateway.tool_descriptors()]

    # -- plumbing -----------------------------------------------------

    def elapsed(self) -> float:
        return self.clock() - self.start

    def advance(self, to: SessionPhase, extra: Optional[dict[str, Any]] = None) -> None:
        check_transition(self.state.phase, to)
        payload: dict[str, Any] = {"from": self.state.phase.value, "to": to.value}
        if extra:
            payload.update(extra)
        self.transcript.append(EventKind.PHASE_CHANGE, payload)
        self.state.phase = to

    def read_file(self) -> str:
        return self.gateway.read_text(self.file_name)

    def finish(self, status: SessionStatus, note: str = "") -> SessionOutcome:
        if self.state.phase is not SessionPhase.TERMINAL:
            self.advance(SessionPhase.TERMINAL)
        verdict = self.last_verdict
        if status is SessionStatus.VERIFIED:
            assert verdict is not None and verdict.verified
        elif verdict is not None and verdict.verified:
            # A non-verified ending never reports a verified verdict.
            verdict = None
        events = self.transcript.events()
        outcome = SessionOutcome(
            status=status,
            final_verdict=verdict,
            api_calls_used=sum(
                1 for e in events if e.kind is EventKind.LLM_REQUEST
            ),
            tool_calls_used=sum(
                1 for e in events if e.kind is EventKind.TOOL_CALL
            ),
            rounds_used=self.state.rounds_used,
            elapsed=self.elapsed(),
            note=note,
        )
        self.transcript.append(
            EventKind.OUTCOME, {"task_id": self.task.id, "outcome": outcome.to_dict()}
        )
        return outcome

    # -- prover turn --------------------------------------------------

    def prover_turn(self) -> ChatMessage:
        """One chat round: maybe a phase nudge, one completion, then run
        every requested tool call in order and answer each."""
        if self.state.phase is not self._last_prompted_phase:
            self.history.append(user(phase_guidance(self.state.phase.value)))
            self._last_prompted_phase = self.state.phase
        reply = self.chat.chat(self.history, self._tools)
        self.history.append(reply)
        for tc in reply.tool_calls:
            record = self.gateway.call(tc.name, tc.arguments, call_id=tc.call_id)
            self.history.append(tool_result(tc.call_id, record.result_text))
        return reply

    # -- phase exits --------------------------------------------------

    def after_scanning(self, reply: ChatMessage) -> None:
        text = self.read_file()
        decls = find_theorem_declarations(text)
        self.state.targets = [d.name for d in decls]
        self.advance(SessionPhase.SKETCHING, {"targets": self.state.targets})

    def after_sketching(self, reply: ChatMessage) -> None:
        if (
            self.negation_probe
            and self.probe_depth == 0
            and detect_ill_posed_claim(reply.content)
        ):
            self._run_negation_probe()
        steps = parse_sketch_steps(reply.content)
        if steps:
            self.state.sketch = [
                SketchStep(index=i, description=d) for i, d in enumerate(steps)
            ]
            self.advance(SessionPhase.FORMALIZING)

    def after_formalizing(self, reply: ChatMessage) -> None:
        text = self.read_file()
        file_haves = extract_have_lines(text)
        wanted = len(self.state.sketch)
        if file_haves and count_incomplete_markers(text) >= 1:
            lines = file_haves
        else:
            lines = extract_have_lines(reply.content)
            if lines:
                skeleton = build_skeleton(self.task.statement, lines)
                self.gateway.write_text(
                    self.file_name, self.task.preamble + skeleton, op="skeleton"
                )
        for i, line in enumerate(lines):
            if i < wanted:
                step = self.state.sketch[i]
                step.formal_text = line
                if step.status is StepStatus.PLANNED:
                    step.to_status(StepStatus.FORMALIZED)
            else:
                self.state.sketch.append(
                    SketchStep(
                        index=i,
                        description=line,
                        formal_text=line,
                        status=StepStatus.FORMALIZED,
                    )
                )
        if self.state.sketch and all(
            s.status is not StepStatus.PLANNED for s in self.state.sketch
        ):
            self.advance(SessionPhase.STEP_PROVING)

    def after_step_proving(self, reply: ChatMessage) -> None:
        text = self.read_file()
        if not contains_incomplete_marker(text):
            for step in self.state.sketch:
                if step.status is StepStatus.FORMALIZED:
                    step.to_status(StepStatus.PROVEN)
            self.advance(SessionPhase.VERIFYING)

    # -- negation probe -----------------------------------------------

    def _run_negation_probe(self) -> None:
        """Fork a sub-session that tries to prove the goal equals False.

        Shares the parent's call meter and deadline but runs in its own
        transcript with its own tool server. A verified probe means the
        original statement is refutable, so the parent ends as ill-posed.
        """
        remaining = self.budget.wall_clock_limit - self.elapsed()
        if remaining <= 0 or self.meter.remaining <= 0:
            return
        try:
            negated = negate_theorem_in_file(self.read_file())
            probe_task = TheoremTask.from_source(
                id=f"{self.task.id}-negation",
                source_path=PROBE_FILE_NAME,
                source_text=negated,
            )
        except ValueError as e:
            self.transcript.append(
                EventKind.FEEDBACK,
                {"origin": "negation_probe", "status": "SKIPPED", "detail": str(e)},
            )
            return
        probe_id = f"{self.session_id}-probe"
        probe_path = None
        if self.transcript.path is not None:
            p = self.transcript.path
            probe_path = p.with_name(f"{p.stem}-probe{p.suffix}")
        probe_transcript = Transcript(probe_id, probe_path)
        probe_gateway = self.gateway.sibling(probe_transcript)
        try:
            probe_gateway.write_text(PROBE_FILE_NAME, probe_task.source_text)
            probe_budget = Budget(
                max_api_calls=self.budget.max_api_calls,
                wall_clock_limit=remaining,
                max_refinement_rounds=self.budget.max_refinement_rounds,
            )
            probe_outcome = run_session(
                probe_task,
                probe_budget,
                self.backend,
                probe_gateway,
                probe_transcript,
                meter=self.meter,
                negation_probe=False,
                file_name=PROBE_FILE_NAME,
                session_id=probe_id,
                clock=self.clock,
                _probe_depth=self.probe_depth + 1,
            )
        finally:
            probe_gateway.close()
            probe_transcript.close()
        self.transcript.append(
            EventKind.FEEDBACK,
            {
                "origin": "negation_probe",
                "status": probe_outcome.status.value,
                "session_id": probe_id,
            },
        )
        if probe_outcome.status is SessionStatus.VERIFIED:
            raise _IllPosedDetected(probe_id)
        self.history.append(
            user(
                "A probe session could not verify the negated statement; "
                "treat the original goal as provable and continue."
            )
        )

    # -- feedback routing ---------------------------------------------

    def handle_verdict(self, verdict: Verdict) -> Optional[SessionOutcome]:
        self.state.rounds_used += 1
        self.last_verdict = verdict
        self.transcript.append(
            EventKind.VERDICT,
            {"round": self.state.rounds_used, "verdict": verdict.to_dict()},
        )
        if verdict.verified:
            return self.finish(SessionStatus.VERIFIED)
        if self.state.rounds_used >= self.budget.max_refinement_rounds:
            return self.finish(
                SessionStatus.FAILED_ROUNDS,
                note=f"no verified proof after {self.state.rounds_used} rounds",
            )
        summary = render_feedback_summary(verdict, self.read_file())
        fb = FeedbackNote(
            round=self.state.rounds_used,
            summary=summary,
            error_count=sum(
                1 for d in verdict.diagnostics if int(d.severity) == 1
            ),
            marker_count=count_incomplete_markers(self.read_file()),
        )
        self.advance(SessionPhase.FEEDBACK)
        self.transcript.append(EventKind.FEEDBACK, fb.to_dict())
        self.history.append(
            user(load_prompt("feedback_note").format(round=fb.round, summary=summary))
        )
        if summary == self.state.last_feedback_summary:
            # Same failure twice in a row: the plan itself is wrong.
            self.state.sketch = []
            self.advance(SessionPhase.SKETCHING)
        else:
            self.advance(SessionPhase.STEP_PROVING)
        self.state.last_feedback_summary = summary
        self.state.needs_prover_turn = True
        return None

    # -- main loop ----------------------------------------------------

    def run(self) -> SessionOutcome:
        self.history = [
            system(load_prompt("prover_system")),
            user(
                load_prompt("task_brief").format(
                    file_name=self.file_name, statement=self.task.statement.strip()
                )
            ),
        ]
        try:
            initial = self.read_file()
            self.advance(SessionPhase.SCANNING)
            if not find_theorem_declarations(initial):
                return self.finish(
                    SessionStatus.ABORTED,
                    note="NO_TARGETS: the file declares no theorems",
                )
            while True:
                if self.controls is not None:
                    for hint in self.controls.checkpoint():
                        self.history.append(user(f"Hint from a collaborator: {hint}"))
                marker = contains_incomplete_marker(self.read_file())
                need_turn = self.state.phase in PROVER_PHASES and (
                    marker or self.state.needs_prover_turn
                )
                if need_turn and self.meter.remaining <= 0:
                    return self.finish(
                        SessionStatus.FAILED_BUDGET_CALLS,
                        note=f"api call budget of {self.meter.limit} exhausted",
                    )
                if self.elapsed() > self.budget.wall_clock_limit:
                    return self.finish(
                        SessionStatus.FAILED_BUDGET_TIME,
                        note=(
                            f"wall clock limit of {self.budget.wall_clock_limit:g}s "
                            "exceeded"
                        ),
                    )
                if self.state.phase in PROVER_PHASES:
                    if not need_turn:
                        # Nothing left to prove: fall through to verification,
                        # one logged phase change per hop.
                        self.advance(NEXT_PHASE[self.state.phase])
                        continue
                    reply = self.prover_turn()
                    self.state.needs_prover_turn = False
                    if self.state.phase is SessionPhase.SCANNING:
                        self.after_scanning(reply)
                    elif self.state.phase is SessionPhase.SKETCHING:
                        self.after_sketching(reply)
                    elif self.state.phase is SessionPhase.FORMALIZING:
                        self.after_formalizing(reply)
                    elif self.state.phase is SessionPhase.STEP_PROVING:
                        self.after_step_proving(reply)
                    continue
                if self.state.phase is SessionPhase.VERIFYING:
                    verdict = verify(self.gateway, self.file_name)
                    done = self.handle_verdict(verdict)
                    if done is not None:
                        return done
                    continue
                raise RuntimeError(
                    f"session loop reached unexpected phase {self.state.phase}"
                )
        except BudgetExceeded:
            return self.finish(
                SessionStatus.FAILED_BUDGET_CALLS,
                note=f"api call budget of {self.meter.limit} exhausted",
            )
        except _IllPosedDetected as e:
            return self.finish(
                SessionStatus.ILL_POSED_DETECTED,
                note=(
                    "negated statement verified in probe session "
                    f"{e.probe_session_id}; the task is contradictory as stated"
                ),
            )
        except AbortRequested as e:
            return self.finish(
                SessionStatus.ABORTED, note=str(e) or "aborted by operator"
            )
        except ProviderError as e:
            return self.finish(SessionStatus.ABORTED, note=f"backend failed: {e}")
        except (ToolchainUnavailable, ServerFailure) as e:
            return self.finish(SessionStatus.ABORTED, note=f"toolchain failed: {e}")


def run_session(
    task: TheoremTask,
    budget: Budget,
    backend: ChatBackend,
    gateway: ToolGateway,
    transcript: Transcript,
    *,
    meter: Optional[CallMeter] = None,
    controls: Optional[SessionControls] = None,
    negation_probe: bool = False,
    file_name: str = TASK_FILE_NAME,
    session_id: str = "session",
    clock: Callable[[], float] = time.monotonic,
    _probe_depth: int = 0,
) -> SessionOutcome:
    """Drive one proving session to a terminal outcome.

    The task file must already exist inside the gateway sandbox under
    ``file_name``; use ``run_task_session`` for the full setup.
    """
    runner = _Runner(
        task=task,
        budget=budget,
        backend=backend,
        gateway=gateway,
        transcript=transcript,
        meter=meter,
        controls=controls,
        negation_probe=negation_probe,
        file_name=file_name,
        session_id=session_id,
        clock=clock,
        probe_depth=_probe_depth,
    )
    return runner.run()


def run_task_session(
    task: TheoremTask,
    budget: Budget,
    backend: ChatBackend,
    workdir: Path | str,
    *,
    server_command: Optional[list[str]] = None,
    session_id: str = "session",
    transcript_path: Optional[Path | str] = None,
    transcript: Optional[Transcript] = None,
    controls: Optional[SessionControls] = None,
    negation_probe: bool = False,
    call_timeout: float = 120.0,
    clock: Callable[[], float] = time.monotonic,
) -> tuple[SessionOutcome, Transcript]:
    """Set up a sandbox, write the task file, run a session, clean up.

    With no ``transcript`` given, one is created (mirrored to
    ``transcript_path`` if set) and closed before returning; its events
    stay readable in memory and on disk. A caller-provided transcript is
    written to but left open, since the caller owns its lifecycle.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    own_transcript = transcript is None
    if transcript is None:
        transcript = Transcript(session_id, transcript_path)
    gateway = ToolGateway(
        workdir, server_command, transcript, call_timeout=call_timeout, clock=clock
    )
    try:
        gateway.write_text(TASK_FILE_NAME, task.source_text)
        outcome = run_session(
            task,
            budget,
            backend,
            gateway,
            transcript,
            controls=controls,
            negation_probe=negation_probe,
            session_id=session_id,
            clock=clock,
        )
    finally:
        gateway.close()
        if own_transcript:
            transcript.close()
    return outcome, transcript
