"""Error taxonomy for tool access.

ToolRejected subclasses describe a call that was refused or failed in a
way the calling agent should see and react to; ServerFailure subclasses
describe infrastructure trouble the supervisor handles (respawn, abort).
"""

from __future__ import annotations


class GatewayError(RuntimeError):
    code = "GATEWAY_ERROR"


class ToolRejected(GatewayError):
    """Call refused or failed; surfaced to the agent as a failed result."""

    code = "TOOL_REJECTED"


class UnknownTool(ToolRejected):
    """Name outside the registry; never forwarded to any server."""

    code = "UNKNOWN_TOOL"


class PathEscape(ToolRejected):
    """Resolved path lies outside the sandbox root."""

    code = "PATH_ESCAPE"


class EditAmbiguous(ToolRejected):
    """edit_file old text matched zero or more than one location."""

    code = "EDIT_AMBIGUOUS"


class NotFound(ToolRejected):
    code = "NOT_FOUND"


class CallTimeout(ToolRejected):
    """Server did not answer a tools/call within the per-call timeout."""

    code = "CALL_TIMEOUT"


class ServerFailure(GatewayError):
    code = "SERVER_FAILURE"


class SpawnFailed(ServerFailure):
    code = "SPAWN_FAILED"


class HandshakeTimeout(ServerFailure):
    code = "HANDSHAKE_TIMEOUT"


class ProtocolMismatch(ServerFailure):
    code = "PROTOCOL_MISMATCH"


class ServerDied(ServerFailure):
    """Process exited mid-conversation; the handle is unusable."""

    code = "SERVER_DIED"


class ToolchainUnavailable(GatewayError):
    """Lean-side tooling kept dying; the session cannot continue."""

    code = "TOOLCHAIN_UNAVAILABLE"


class UnparseablePayload(GatewayError):
    """Diagnostic payload in no recognized shape."""

    code = "UNPARSEABLE_PAYLOAD"
