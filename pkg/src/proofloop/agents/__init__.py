"""Agent layer: phase machine, prover helpers, verifier, session loop."""

from .orchestrator import (  # noqa: F401
    PROBE_FILE_NAME,
    TASK_FILE_NAME,
    AbortRequested,
    SessionControls,
    run_session,
    run_task_session,
)
from .phases import (  # noqa: F401
    LEGAL_TRANSITIONS,
    NEXT_PHASE,
    PROVER_PHASES,
    FeedbackNote,
    IllegalTransition,
    ProofState,
    SessionPhase,
    SketchStep,
    StepStatus,
    check_transition,
)
from .prover import (  # noqa: F401
    EmptySketch,
    build_skeleton,
    detect_ill_posed_claim,
    extract_have_lines,
    load_prompt,
    parse_sketch_steps,
    phase_guidance,
)
from .verifier import render_feedback_summary, verify  # noqa: F401
