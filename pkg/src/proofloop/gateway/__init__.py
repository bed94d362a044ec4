"""Tool access layer: registry, sandboxed filesystem tools, MCP client."""

from .core import MAX_RESPAWNS, ToolCallRecord, ToolGateway  # noqa: F401
from .diagnostics import parse_diagnostics  # noqa: F401
from .errors import (  # noqa: F401
    CallTimeout,
    EditAmbiguous,
    GatewayError,
    HandshakeTimeout,
    NotFound,
    PathEscape,
    ProtocolMismatch,
    ServerDied,
    ServerFailure,
    SpawnFailed,
    ToolchainUnavailable,
    ToolRejected,
    UnknownTool,
    UnparseablePayload,
)
from .fstools import FsResult, Sandbox, fs_tool  # noqa: F401
from .mcp import ServerHandle, call_tool_wire, spawn_server  # noqa: F401
from .registry import (  # noqa: F401
    FILESYSTEM_TOOL_NAMES,
    FILESYSTEM_TOOLS,
    LEAN_TOOL_NAMES,
    LEAN_TOOLS,
    ToolDescriptor,
    ToolOrigin,
    build_registry,
    is_known_tool,
)
