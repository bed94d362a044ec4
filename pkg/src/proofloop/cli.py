"""Command line entry point: prove one theorem file.

Runs a full proving session over the given Lean file and reports the
outcome. Exit status is 0 exactly when the proof verified.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .agents import run_task_session
from .backend import BackendConfig, build_backend
from .model import Budget, InvalidTask, TheoremTask


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="prove",
        description="Drive an agent session that proves one Lean theorem.",
    )
    p.add_argument("file", help="Lean file containing exactly one open theorem")
    p.add_argument(
        "--budget-calls",
        type=int,
        default=200,
        metavar="N",
        help="maximum completion API calls (default 200)",
    )
    p.add_argument(
        "--timeout-sec",
        type=float,
        default=1500.0,
        metavar="S",
        help="wall clock limit in seconds (default 1500)",
    )
    p.add_argument(
        "--rounds",
        type=int,
        default=5,
        metavar="R",
        help="maximum verification rounds (default 5)",
    )
    p.add_argument(
        "--hard",
        action="store_true",
        help="hard preset: 400 calls and no wall clock limit",
    )
    p.add_argument(
        "--negation-probe",
        action="store_true",
        help="on an ill-posedness claim, fork a probe that tries the negation",
    )
    p.add_argument(
        "--config",
        metavar="PATH",
        help="JSON file with the completion backend configuration",
    )
    p.add_argument(
        "--scripted",
        metavar="PATH",
        help="replay assistant turns from a transcript instead of a live backend",
    )
    p.add_argument(
        "--server-cmd",
        metavar="CMD",
        help="tool server command line (whitespace separated)",
    )
    p.add_argument(
        "--stub-tools",
        nargs="?",
        const="",
        default=None,
        metavar="FIXTURE",
        help="use the bundled stub tool server, optionally with a fixture file",
    )
    p.add_argument(
        "--workdir",
        metavar="DIR",
        help="sandbox directory for the session (default: a fresh temp dir)",
    )
    p.add_argument(
        "--transcript",
        metavar="PATH",
        help="write the event transcript to this file",
    )
    p.add_argument("--session-id", default="cli", help="session id for the transcript")
    return p


def _load_backend_config(args: argparse.Namespace) -> BackendConfig:
    if args.scripted:
        return BackendConfig.scripted(args.scripted)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            return BackendConfig.from_dict(json.load(fh))
    raise SystemExit("prove: pass --config for a live backend or --scripted to replay")


def _server_command(args: argparse.Namespace) -> Optional[list[str]]:
    if args.server_cmd:
        return args.server_cmd.split()
    if args.stub_tools is not None:
        cmd = [sys.executable, "-m", "proofloop.gateway.stubserver"]
        if args.stub_tools:
            cmd += ["--fixture", args.stub_tools]
        return cmd
    return None


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    source_path = Path(args.file)
    try:
        source_text = source_path.read_text(encoding="utf-8")
    except OSError as e:
        print(f"prove: cannot read {source_path}: {e}", file=sys.stderr)
        return 2
    try:
        task = TheoremTask.from_source(
            id=source_path.stem, source_path=str(source_path), source_text=source_text
        )
    except InvalidTask as e:
        print(f"prove: {e}", file=sys.stderr)
        return 2
    if args.hard:
        budget = Budget.hard_mode()
    else:
        budget = Budget(
            max_api_calls=args.budget_calls,
            wall_clock_limit=args.timeout_sec,
            max_refinement_rounds=args.rounds,
        )
    backend = build_backend(_load_backend_config(args))
    workdir = Path(args.workdir) if args.workdir else Path(
        tempfile.mkdtemp(prefix="proofloop-")
    )
    transcript_path = (
        Path(args.transcript) if args.transcript else workdir / "session.axlog"
    )
    outcome, _ = run_task_session(
        task,
        budget,
        backend,
        workdir,
        server_command=_server_command(args),
        session_id=args.session_id,
        transcript_path=transcript_path,
        negation_probe=args.negation_probe,
    )
    wall = (
        "none"
        if math.isinf(budget.wall_clock_limit)
        else f"{budget.wall_clock_limit:g}s"
    )
    print(f"task: {task.id}")
    print(f"budget: {budget.max_api_calls} calls, {wall}, {budget.max_refinement_rounds} rounds")
    print(f"status: {outcome.status.value}")
    if outcome.final_verdict is not None:
        print(f"reasons: {', '.join(r.value for r in outcome.final_verdict.reasons)}")
    print(
        "used: "
        f"{outcome.api_calls_used} api calls, {outcome.tool_calls_used} tool calls, "
        f"{outcome.rounds_used} rounds, {outcome.elapsed:.1f}s"
    )
    if outcome.note:
        print(f"note: {outcome.note}")
    print(f"transcript: {transcript_path}")
    return 0 if outcome.status.value == "VERIFIED" else 1


if __name__ == "__main__":
    sys.exit(main())
