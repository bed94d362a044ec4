"""In-process filesystem tools, confined to a sandbox root.

Every path argument, absolute or relative, is resolved (symlinks
included) and must land inside the sandbox; anything else is rejected
before any filesystem access.  Mutating tools report the file content
they produced so the caller can log a snapshot.
"""

from __future__ import annotations

import stat
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import EditAmbiguous, NotFound, PathEscape, UnknownTool
from .registry import FILESYSTEM_TOOL_NAMES


class Sandbox:
    """Path resolver rooted at one real directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root).resolve()
        if not self.root.is_dir():
            raise NotADirectoryError(f"sandbox root {self.root} is not a directory")

    def resolve(self, raw: str) -> Path:
        """Map a tool-supplied path to a real path inside the root.

        Relative paths hang off the root; absolute paths are accepted
        only when they already point inside it.  Resolution follows
        symlinks, so a link that points outside is an escape even though
        its own path looks clean.
        """
        if not isinstance(raw, str) or raw == "":
            raise PathEscape(f"invalid path argument: {raw!r}")
        if "\x00" in raw:
            raise PathEscape("path contains NUL")
        p = Path(raw)
        candidate = p if p.is_absolute() else self.root / p
        try:
            real = candidate.resolve()
        except (OSError, RuntimeError) as e:
            raise PathEscape(f"cannot resolve {raw!r}: {e}") from e
        if real != self.root and self.root not in real.parents:
            raise PathEscape(f"path {raw!r} leaves the workspace")
        return real

    def relative(self, path: Path) -> str:
        if path == self.root:
            return "."
        return str(path.relative_to(self.root))


@dataclass
class FsResult:
    """Outcome of one filesystem tool call."""

    payload: Any
    snapshots: list[dict[str, Any]] = field(default_factory=list)

    def text(self) -> str:
        import json

        if isinstance(self.payload, str):
            return self.payload
        return json.dumps(self.payload, ensure_ascii=False, indent=2)


def _require_file(path: Path, raw: str) -> None:
    if not path.is_file():
        raise NotFound(f"no such file: {raw}")


def _require_dir(path: Path, raw: str) -> None:
    if not path.is_dir():
        raise NotFound(f"no such directory: {raw}")


def _snapshot(sandbox: Sandbox, path: Path, op: str) -> dict[str, Any]:
    content = path.read_text(encoding="utf-8") if path.is_file() else None
    return {"path": sandbox.relative(path), "op": op, "content": content}


def _read_file(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    _require_file(path, args["path"])
    return FsResult(path.read_text(encoding="utf-8"))


def _read_multiple_files(sb: Sandbox, args: dict) -> FsResult:
    paths = args.get("paths")
    if not isinstance(paths, list):
        raise NotFound("paths must be a list")
    contents: dict[str, str] = {}
    errors: dict[str, str] = {}
    for raw in paths:
        try:
            path = sb.resolve(raw)
            _require_file(path, raw)
            contents[raw] = path.read_text(encoding="utf-8")
        except (PathEscape, NotFound) as e:
            errors[raw] = str(e)
    return FsResult({"contents": contents, "errors": errors})


def _write_file(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    content = args.get("content", "")
    sb_rel_parent = path.parent
    sb_rel_parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    return FsResult(
        f"wrote {len(content)} characters",
        snapshots=[_snapshot(sb, path, "write_file")],
    )


def _edit_file(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    _require_file(path, args["path"])
    old = args.get("old_text", "")
    new = args.get("new_text", "")
    if old == "":
        raise EditAmbiguous("old_text must be nonempty")
    text = path.read_text(encoding="utf-8")
    count = text.count(old)
    if count != 1:
        raise EditAmbiguous(
            f"old_text occurs {count} times in {args['path']}; need exactly one match"
        )
    path.write_text(text.replace(old, new, 1), encoding="utf-8")
    return FsResult("edit applied", snapshots=[_snapshot(sb, path, "edit_file")])


def _create_directory(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    path.mkdir(parents=True, exist_ok=True)
    return FsResult(
        "directory created",
        snapshots=[{"path": sb.relative(path), "op": "create_directory", "content": None}],
    )


def _entry_type(path: Path) -> str:
    return "dir" if path.is_dir() else "file"


def _list_directory(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    _require_dir(path, args["path"])
    entries = [
        {"name": p.name, "type": _entry_type(p)} for p in sorted(path.iterdir())
    ]
    return FsResult(entries)


def _list_directory_with_sizes(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    _require_dir(path, args["path"])
    entries = []
    for p in sorted(path.iterdir()):
        entries.append(
            {
                "name": p.name,
                "type": _entry_type(p),
                "size": p.stat().st_size if p.is_file() else 0,
            }
        )
    return FsResult(entries)


def _directory_tree(sb: Sandbox, args: dict) -> FsResult:
    root = sb.resolve(args["path"])
    _require_dir(root, args["path"])

    def walk(path: Path) -> dict[str, Any]:
        node: dict[str, Any] = {"name": path.name or str(path), "type": _entry_type(path)}
        if path.is_dir():
            node["children"] = [walk(p) for p in sorted(path.iterdir())]
        return node

    return FsResult(walk(root))


def _move_file(sb: Sandbox, args: dict) -> FsResult:
    src = sb.resolve(args["source"])
    dst = sb.resolve(args["destination"])
    if not src.exists():
        raise NotFound(f"no such file: {args['source']}")
    if dst.exists():
        raise NotFound(f"destination already exists: {args['destination']}")
    dst.parent.mkdir(parents=True, exist_ok=True)
    src.rename(dst)
    snaps = [{"path": sb.relative(src), "op": "move_file_out", "content": None}]
    snaps.append(_snapshot(sb, dst, "move_file"))
    return FsResult("moved", snapshots=snaps)


def _search_files(sb: Sandbox, args: dict) -> FsResult:
    root = sb.resolve(args["path"])
    _require_dir(root, args["path"])
    pattern = str(args.get("pattern", "")).lower()
    matches = [
        sb.relative(p)
        for p in sorted(root.rglob("*"))
        if pattern and pattern in p.name.lower()
    ]
    return FsResult(matches)


def _get_file_info(sb: Sandbox, args: dict) -> FsResult:
    path = sb.resolve(args["path"])
    if not path.exists():
        raise NotFound(f"no such path: {args['path']}")
    st = path.stat()
    return FsResult(
        {
            "size": st.st_size,
            "modified": st.st_mtime,
            "created": st.st_ctime,
            "is_file": path.is_file(),
            "is_dir": path.is_dir(),
            "permissions": stat.filemode(st.st_mode),
        }
    )


def _list_allowed_directories(sb: Sandbox, args: dict) -> FsResult:
    return FsResult([str(sb.root)])


_HANDLERS: dict[str, Callable[[Sandbox, dict], FsResult]] = {
    "read_file": _read_file,
    "read_multiple_files": _read_multiple_files,
    "write_file": _write_file,
    "edit_file": _edit_file,
    "create_directory": _create_directory,
    "list_directory": _list_directory,
    "list_directory_with_sizes": _list_directory_with_sizes,
    "directory_tree": _directory_tree,
    "move_file": _move_file,
    "search_files": _search_files,
    "get_file_info": _get_file_info,
    "list_allowed_directories": _list_allowed_directories,
}

assert set(_HANDLERS) == set(FILESYSTEM_TOOL_NAMES)


def fs_tool(name: str, args: dict[str, Any], sandbox: Sandbox) -> FsResult:
    """Execute one filesystem tool against the sandbox.

    Raises UnknownTool for names outside the fixed set, PathEscape for
    any path that resolves outside the root, NotFound and EditAmbiguous
    per tool semantics.  KeyError on a missing required argument is
    normalized to NotFound so callers see one error family.
    """
    handler = _HANDLERS.get(name)
    if handler is None:
        raise UnknownTool(f"unknown filesystem tool: {name}")
    try:
        return handler(sandbox, args)
    except KeyError as e:
        raise NotFound(f"missing argument {e} for {name}") from e
