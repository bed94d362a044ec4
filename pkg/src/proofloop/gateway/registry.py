"""Tool registry: the closed set of callable tool names.

Two origins exist: Lean-server tools forwarded over the wire, and
filesystem tools executed in-process against a sandbox.  Anything not
listed here is rejected before any dispatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class ToolOrigin(str, Enum):
    LEAN_SERVER = "LEAN_SERVER"
    FILESYSTEM = "FILESYSTEM"


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    origin: ToolOrigin
    description: str
    input_schema: dict[str, Any] = field(default_factory=dict)

    def to_wire(self) -> dict[str, Any]:
        """Shape used in chat-completions tool declarations."""
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.input_schema
                or {"type": "object", "properties": {}},
            },
        }


def _schema(required: dict[str, str], optional: dict[str, str] | None = None) -> dict:
    props = {k: {"type": v} for k, v in required.items()}
    if optional:
        props.update({k: {"type": v} for k, v in optional.items()})
    return {"type": "object", "properties": props, "required": list(required)}


_PATH = _schema({"path": "string"})
_FILE = _schema({"file": "string"})

LEAN_TOOLS: tuple[ToolDescriptor, ...] = tuple(
    ToolDescriptor(name, ToolOrigin.LEAN_SERVER, desc, schema)
    for name, desc, schema in [
        ("lean_build", "Compile and build the Lean project", _schema({}, {"target": "string"})),
        ("lean_file_contents", "Get contents of a Lean file", _FILE),
        ("lean_declaration_file", "Find which file contains a declaration", _schema({"declaration": "string"})),
        ("lean_diagnostic_messages", "Compile code and return diagnostic messages", _FILE),
        ("lean_goal", "Get the current proof goal at a position", _schema({"file": "string", "line": "integer"}, {"column": "integer"})),
        ("lean_term_goal", "Get goal information for a term", _schema({"file": "string", "line": "integer"}, {"column": "integer"})),
        ("lean_hover_info", "Get hover information for symbols", _schema({"file": "string", "line": "integer", "column": "integer"})),
        ("lean_completions", "Get completion suggestions", _schema({"file": "string", "line": "integer", "column": "integer"})),
        ("lean_multi_attempt", "Try multiple proof attempts", _schema({"file": "string", "snippets": "array"})),
        ("lean_run_code", "Execute Lean code", _schema({"code": "string"})),
        ("lean_leansearch", "Search for theorems and lemmas", _schema({"query": "string"})),
        ("lean_loogle", "Search for lemmas by type signature", _schema({"query": "string"})),
        ("lean_state_search", "Search proof states", _schema({"file": "string", "line": "integer"})),
        ("lean_hammer_premise", "Use automated premise selection", _schema({"file": "string", "line": "integer"})),
    ]
)

FILESYSTEM_TOOLS: tuple[ToolDescriptor, ...] = tuple(
    ToolDescriptor(name, ToolOrigin.FILESYSTEM, desc, schema)
    for name, desc, schema in [
        ("read_file", "Read a file inside the workspace", _PATH),
        ("read_multiple_files", "Read several files at once", _schema({"paths": "array"})),
        ("write_file", "Create or overwrite a file", _schema({"path": "string", "content": "string"})),
        ("edit_file", "Replace one exact text occurrence in a file", _schema({"path": "string", "old_text": "string", "new_text": "string"})),
        ("create_directory", "Create a directory (parents included)", _PATH),
        ("list_directory", "List directory entries", _PATH),
        ("list_directory_with_sizes", "List directory entries with sizes", _PATH),
        ("directory_tree", "Recursive directory tree", _PATH),
        ("move_file", "Move or rename a file", _schema({"source": "string", "destination": "string"})),
        ("search_files", "Find files whose names match a pattern", _schema({"path": "string", "pattern": "string"})),
        ("get_file_info", "Stat a file or directory", _PATH),
        ("list_allowed_directories", "Show the sandbox root", _schema({})),
    ]
)

LEAN_TOOL_NAMES: frozenset[str] = frozenset(t.name for t in LEAN_TOOLS)
FILESYSTEM_TOOL_NAMES: frozenset[str] = frozenset(t.name for t in FILESYSTEM_TOOLS)


def build_registry() -> dict[str, ToolDescriptor]:
    """Immutable-by-convention name -> descriptor map for one session."""
    return {t.name: t for t in LEAN_TOOLS + FILESYSTEM_TOOLS}


def is_known_tool(name: str) -> bool:
    return name in LEAN_TOOL_NAMES or name in FILESYSTEM_TOOL_NAMES
