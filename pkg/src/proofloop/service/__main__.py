"""Run the session service from the command line.

    python3 -m proofloop.service --root /tmp/sessions --scripted-dir scripts/

The scripted backend keeps the service fully offline; pass ``--config``
with provider credentials to drive a real model instead.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..backend.config import BackendConfig
from ..backend.providers import ScriptedBackend, build_backend, load_script
from ..model import TheoremTask
from .app import create_app
from .manager import SessionManager


def _parse_args(argv: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="proofloop-service", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--root", required=True, help="directory for session state")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8422)
    parser.add_argument("--token", default=None, help="bearer token, omit to disable auth")
    parser.add_argument("--max-sessions", type=int, default=8)
    parser.add_argument("--config", default=None, help="JSON backend config path")
    parser.add_argument(
        "--scripted-dir",
        default=None,
        help="directory of <task_id>.axlog reply scripts (offline mode)",
    )
    parser.add_argument(
        "--server-cmd",
        default=None,
        help="tool server command, default: built-in stub",
    )
    return parser.parse_args(argv)


def scripted_factory(script_root: Path):
    """Backend factory serving <task id>.axlog replies from a directory.

    A task with no script file gets an empty script, so the session
    aborts cleanly instead of crashing the worker.
    """

    def backend_factory(task: TheoremTask):
        path = script_root / f"{task.id}.axlog"
        if not path.exists():
            return ScriptedBackend([])
        return ScriptedBackend(load_script(path), source=str(path))

    return backend_factory


def main(argv: list[str] | None = None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    if args.scripted_dir is not None:
        backend_factory = scripted_factory(Path(args.scripted_dir))
    elif args.config is not None:
        config = BackendConfig.from_dict(json.loads(Path(args.config).read_text()))

        def backend_factory(task: TheoremTask):
            return build_backend(config)

    else:
        print("one of --scripted-dir or --config is required", file=sys.stderr)
        return 2

    if args.server_cmd is not None:
        server_command = args.server_cmd.split()
    else:
        server_command = [sys.executable, "-m", "proofloop.gateway.stubserver"]

    manager = SessionManager(
        Path(args.root),
        backend_factory,
        server_command,
        max_sessions=args.max_sessions,
        token=args.token,
    )
    app = create_app(manager)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
