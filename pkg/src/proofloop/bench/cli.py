"""Benchmark command line: run a manifest, report a finished run."""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path
from typing import Optional

from ..backend import BackendConfig, ScriptedBackend, build_backend, load_script
from ..model import Budget
from .dataset import ManifestError, load_manifest
from .report import accuracy_table, load_run, tactic_table, tool_usage_table
from .runner import BenchConfigError, run_benchmark


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bench", description="Run and report theorem-proving benchmarks."
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute every task in a manifest")
    run.add_argument("--manifest", required=True, metavar="PATH")
    run.add_argument("--out", default="runs", metavar="DIR", help="run root directory")
    run.add_argument("--run-id", metavar="ID", help="id for a fresh run")
    run.add_argument(
        "--resume", metavar="ID", help="continue an existing run, skipping done tasks"
    )
    run.add_argument("--budget-calls", type=int, default=200, metavar="N")
    run.add_argument("--timeout-sec", type=float, default=1500.0, metavar="S")
    run.add_argument("--rounds", type=int, default=5, metavar="R")
    run.add_argument(
        "--hard", action="store_true", help="hard preset: 400 calls, no time limit"
    )
    run.add_argument("--parallelism", type=int, default=4, metavar="N")
    run.add_argument("--negation-probe", action="store_true")
    run.add_argument("--config", metavar="PATH", help="backend configuration JSON")
    run.add_argument(
        "--scripted-dir",
        metavar="DIR",
        help="directory of per-task reply scripts named <task_id>.axlog",
    )
    run.add_argument("--server-cmd", metavar="CMD", help="tool server command line")
    run.add_argument(
        "--stub-tools",
        nargs="?",
        const="",
        default=None,
        metavar="FIXTURE",
        help="use the bundled stub tool server",
    )
    run.add_argument(
        "--check-compiler",
        metavar="CMD",
        help="compiler command line for the independent check",
    )

    rep = sub.add_parser("report", help="render tables for a finished run")
    rep.add_argument("run_id", metavar="RUN_ID")
    rep.add_argument("--out", default="runs", metavar="DIR", help="run root directory")
    rep.add_argument(
        "--table",
        choices=["accuracy", "tools", "tactics"],
        default="accuracy",
    )
    return p


def _backend_factory(args: argparse.Namespace):
    if args.scripted_dir:
        script_root = Path(args.scripted_dir)

        def factory(task):
            path = script_root / f"{task.id}.axlog"
            if not path.is_file():
                return ScriptedBackend([], source=str(path))
            return ScriptedBackend(load_script(path), source=str(path))

        return factory
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = BackendConfig.from_dict(json.load(fh))
        return lambda task: build_backend(config)
    raise SystemExit("bench run: pass --config or --scripted-dir")


def _server_command(args: argparse.Namespace) -> Optional[list[str]]:
    if args.server_cmd:
        return args.server_cmd.split()
    if args.stub_tools is not None:
        cmd = [sys.executable, "-m", "proofloop.gateway.stubserver"]
        if args.stub_tools:
            cmd += ["--fixture", args.stub_tools]
        return cmd
    return None


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as e:
        print(f"bench: {e}", file=sys.stderr)
        return 2
    if args.hard:
        budget = Budget.hard_mode()
    else:
        budget = Budget(
            max_api_calls=args.budget_calls,
            wall_clock_limit=args.timeout_sec,
            max_refinement_rounds=args.rounds,
        )
    resume = args.resume is not None
    run_id = args.resume or args.run_id or datetime.datetime.now().strftime(
        "run-%Y%m%d-%H%M%S"
    )
    try:
        report = run_benchmark(
            manifest,
            args.out,
            run_id,
            budget,
            _backend_factory(args),
            server_command=_server_command(args),
            parallelism=args.parallelism,
            resume=resume,
            negation_probe=args.negation_probe,
            check_compiler=args.check_compiler.split() if args.check_compiler else None,
        )
    except BenchConfigError as e:
        print(f"bench: {e}", file=sys.stderr)
        return 2
    done = len(report.completed())
    print(f"run {run_id}: {done}/{len(report.records)} tasks completed")
    print(accuracy_table(report), end="")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.out) / args.run_id
    if not (run_dir / "run.json").is_file():
        print(f"bench: no run found at {run_dir}", file=sys.stderr)
        return 2
    report = load_run(run_dir)
    if args.table == "accuracy":
        print(accuracy_table(report), end="")
    elif args.table == "tools":
        print(tool_usage_table(report), end="")
    else:
        print(tactic_table(report), end="")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_report(args)


if __name__ == "__main__":
    sys.exit(main())
